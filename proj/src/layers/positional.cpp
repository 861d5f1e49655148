#include "gaitformer/layers.hpp"

#include "gaitformer/errors.hpp"

namespace gaitformer::layers {

std::vector<double> temporal_pe(std::size_t length) {
    if (length < 2) {
        throw Error("temporal positional encoding needs length >= 2, got " +
                    std::to_string(length));
    }
    std::vector<double> pe(length);
    const double last = static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
        pe[i] = static_cast<double>(i) / last;
    }
    return pe;
}

double spatial_pe(std::size_t sensor, std::size_t sensor_count) {
    if (sensor_count < 2 || sensor >= sensor_count) {
        throw Error("sensor index " + std::to_string(sensor) + " outside 0.." +
                    std::to_string(sensor_count - 1));
    }
    return static_cast<double>(sensor) / static_cast<double>(sensor_count - 1);
}

} // namespace gaitformer::layers
