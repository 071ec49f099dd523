#include "gait/serialize.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace gait {

namespace {
constexpr std::uint64_t kMaxRank = 16;
}

void write_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b.data(), 8);
}

std::uint64_t read_u64(std::istream& is) {
    std::array<unsigned char, 8> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw std::runtime_error("truncated tensor stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }
double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

std::uint64_t serialized_size(const Shape& shape) { return 8 * (1 + shape.size() + numel(shape)); }

void write_tensor(std::ostream& os, const Tensor& t) {
    write_u64(os, t.rank());
    for (auto e : t.shape()) write_u64(os, e);
    for (double v : t.data()) write_f64(os, v);
}

Tensor read_tensor(std::istream& is) {
    const std::uint64_t rank = read_u64(is);
    if (rank > kMaxRank) throw std::runtime_error("tensor header has implausible rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& e : shape) {
        e = read_u64(is);
        if (e == 0) throw std::runtime_error("tensor header has a zero extent");
    }
    std::vector<double> values(numel(shape));
    for (auto& v : values) v = read_f64(is);
    return Tensor::from(std::move(shape), std::move(values));
}

}  // namespace gait
