#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twinmap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (voxel files, point clouds, trajectories, scenes, configs).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Caller violated a precondition (bad parameter, empty input, degenerate geometry).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// ICP lost overlap between the clouds.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t iteration, std::size_t correspondences)
        : Error("alignment diverged at iteration " + std::to_string(iteration) + " (" +
                std::to_string(correspondences) + " correspondences within search radius)"),
          iteration_(iteration),
          correspondences_(correspondences) {}

    std::size_t iteration() const noexcept { return iteration_; }
    std::size_t correspondences() const noexcept { return correspondences_; }

private:
    std::size_t iteration_;
    std::size_t correspondences_;
};

/// No cine-camera altitude within the far-plane limit covers the sensor tiles.
class PlacementError : public Error {
public:
    using Error::Error;
};

}  // namespace twinmap
