#include "unravel/trajectory.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace unravel {

double default_time_step(const LindbladModel& model)
{
    const double scale = model.max_rate_scale();
    if (scale <= 0.0) return kDefaultRateStep;
    return std::min(kDefaultRateStep, kDefaultRateStep / scale);
}

void check_time_step(const LindbladModel& model, double dt)
{
    const double product = model.max_rate_scale() * dt;
    if (product > kMaxRateStep) {
        std::ostringstream msg;
        msg << "time step " << dt << " too large: max_j ||L_j||^2 dt = " << product << " exceeds " << kMaxRateStep;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace unravel
