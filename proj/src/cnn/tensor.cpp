#include "har/cnn/tensor.hpp"

#include <cmath>

namespace har::cnn {

double Rng::normal(double mean, double std) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + std * spare_;
    }
    // Box-Muller
    double u1, u2;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + std * r * std::cos(theta);
}

}  // namespace har::cnn
