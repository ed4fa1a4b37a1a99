#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "replume/tensor.hpp"

namespace replume {

// One recorded operation. Nodes are appended in execution order, so inputs of
// every node were produced by earlier nodes or are leaves, and replaying the
// backward rules in reverse order visits each node exactly once.
struct TapeNode {
  std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
  std::shared_ptr<detail::TensorImpl> output;
  std::function<void()> backward;
};

class Tape {
 public:
  void record(TapeNode node) { nodes_.push_back(std::move(node)); }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }
  const std::vector<TapeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TapeNode> nodes_;
};

// Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Gradients of
// tape-produced intermediates are reset on every call; leaf gradients
// accumulate across calls until zeroed by the caller.
void backward(const Tensor& loss, Tape& tape);

}  // namespace replume
