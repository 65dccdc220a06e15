#include "doseopt/isotonic.hpp"

#include "doseopt/error.hpp"

namespace doseopt {

std::vector<double> isotonic_fit(std::span<const double> values, std::span<const double> weights) {
  require(values.size() == weights.size(), ErrorCode::kValidation,
          "values and weights differ in length", "weights");
  struct Block {
    double mean;
    double weight;
    size_t count;
  };
  std::vector<Block> blocks;
  for (size_t i = 0; i < values.size(); ++i) {
    require(weights[i] > 0.0, ErrorCode::kValidation, "weights must be positive", "weights");
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
      a.weight = w;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

}  // namespace doseopt
