#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>

namespace articulate {

// All randomness in the pipeline flows from a master seed through
// derive_seed(master, purpose, id).  Purpose strings keep independent
// pipeline stages ("scene", "predict", "ransac", ...) on disjoint streams,
// ids keep scenes independent of each other, so partial re-runs and
// parallel execution reproduce the serial results.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t id);

// Deterministic random stream.  std::mt19937_64 has a standard-mandated
// output sequence; the distributions below are hand-rolled because the
// standard library's are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0,1), 53-bit resolution
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0,n)
  std::size_t index(std::size_t n);

  // standard normal via Box-Muller (two uniform draws per call)
  double normal();
  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  Eigen::Vector3d unit_vector();

 private:
  std::mt19937_64 engine_;
};

}  // namespace articulate
