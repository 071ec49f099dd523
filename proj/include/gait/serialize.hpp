#pragma once

#include <cstdint>
#include <iosfwd>

#include "gait/tensor.hpp"

namespace gait {

// Binary tensor record: u64 rank, u64 extents..., f64 values; all little-endian.
void write_tensor(std::ostream& os, const Tensor& t);
/// Throws std::runtime_error on a short read or an implausible header.
Tensor read_tensor(std::istream& is);
std::uint64_t serialized_size(const Shape& shape);

void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is);
void write_f64(std::ostream& os, double v);
double read_f64(std::istream& is);

}  // namespace gait
