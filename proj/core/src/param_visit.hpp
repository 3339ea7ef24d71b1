#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>

#include "hddrul/neural.hpp"

namespace hddrul::detail {

// Calls fn(name, span) for every tensor of `params` in the canonical
// order. Works for const and non-const Parameters.
template <typename P, typename Fn>
  requires std::is_same_v<std::remove_const_t<P>, Parameters>
void visit_tensors(P& params, Fn&& fn) {
  using Scalar = std::conditional_t<std::is_const_v<P>, const double, double>;
  auto emit = [&](std::string_view name, auto& tensor) {
    fn(name, std::span<Scalar>(tensor.data(), static_cast<std::size_t>(tensor.size())));
  };
  emit("forward.input_weights", params.forward.input_weights);
  emit("forward.hidden_weights", params.forward.hidden_weights);
  emit("forward.bias", params.forward.bias);
  if (params.backward) {
    emit("backward.input_weights", params.backward->input_weights);
    emit("backward.hidden_weights", params.backward->hidden_weights);
    emit("backward.bias", params.backward->bias);
  }
  emit("dense.weights", params.dense.weights);
  fn(std::string_view("dense.bias"), std::span<Scalar>(&params.dense.bias, 1));
}

}  // namespace hddrul::detail
