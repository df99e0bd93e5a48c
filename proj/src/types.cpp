#include "mamr/types.hpp"

namespace mamr {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError("params." + field + ": " + what);
}

}  // namespace

void RobotParams::validate() const {
    require(std::isfinite(mass) && mass > 0.0, "mass", "must be > 0");
    require(std::isfinite(inertia) && inertia > 0.0, "inertia", "must be > 0");
    require(std::isfinite(gravity) && gravity > 0.0, "gravity", "must be > 0");
    require(std::isfinite(v_eps) && v_eps > 0.0, "v_eps", "must be > 0");
    for (std::size_t i = 0; i < 2; ++i) {
        const std::string idx = "[" + std::to_string(i) + "]";
        require(mu_k[i] >= 0.0 && mu_k[i] <= 1.0, "mu_k" + idx, "must lie in [0, 1]");
        require(std::isfinite(brakes[i].x_r) && std::isfinite(brakes[i].y_r),
                "brakes" + idx, "must be finite");
    }
    require(brakes[0].y_r != brakes[1].y_r, "brakes",
            "brake moment arms y_r must differ");
}

}  // namespace mamr
