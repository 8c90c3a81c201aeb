#pragma once

#include <array>
#include <cstdint>

namespace arwp {

// Counter-based Philox4x32-10. A stream is fully determined by (seed, stream id),
// so draws for particle i at iteration k never depend on scheduling.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key);
};

// What a stream is used for; mixed into the stream id.
enum class StreamPurpose : std::uint32_t {
    Init = 1,
    Normalizer = 2,
    Noise = 3,
    Accept = 4,
    Test = 99,
};

std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t iteration, std::uint64_t particle);

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    // uniform on (0, 1), never returns 0
    double uniform();
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Block buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace arwp
