#ifndef PINT_STATE_HPP
#define PINT_STATE_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pint/error.hpp"
#include "pint/linalg.hpp"

namespace pint {

/// Named contiguous range of a state vector (e.g. the fluid velocities or the interface displacement).
struct Block
{
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Disjoint blocks that tile a state vector in order.
class Layout
{
public:
  explicit Layout(std::vector<Block> blocks) : blocks_(std::move(blocks))
  {
    std::size_t next = 0;
    for (const Block& b : blocks_) {
      if (b.offset != next || b.length == 0) {
        throw InvalidArgument("Layout: blocks must be non-empty and tile the vector in order");
      }
      next += b.length;
    }
    size_ = next;
    if (size_ == 0) {
      throw InvalidArgument("Layout: empty");
    }
  }

  /// Single block covering n entries.
  static std::shared_ptr<const Layout> single(std::string name, std::size_t n)
  {
    return std::make_shared<const Layout>(std::vector<Block>{{std::move(name), 0, n}});
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }

  [[nodiscard]] const Block& block(std::string_view name) const
  {
    for (const Block& b : blocks_) {
      if (b.name == name) {
        return b;
      }
    }
    throw InvalidArgument("Layout: no block named '" + std::string(name) + "'");
  }

  friend bool operator==(const Layout& a, const Layout& b) { return a.blocks_ == b.blocks_; }

private:
  std::vector<Block> blocks_;
  std::size_t size_ = 0;
};

/// All unknowns of one problem at one time instant.
struct State
{
  RealVector values;
  double time = 0.0;
  std::shared_ptr<const Layout> layout;

  State() = default;
  State(RealVector v, double t, std::shared_ptr<const Layout> l)
    : values(std::move(v)), time(t), layout(std::move(l))
  {
    validate();
  }

  void validate() const
  {
    if (!layout) {
      throw InvalidArgument("State: missing layout");
    }
    if (layout->size() != values.size()) {
      throw ShapeMismatch("State: values do not match layout size");
    }
    if (!std::isfinite(time)) {
      throw NumericBreakdown("State: non-finite time");
    }
  }

  [[nodiscard]] std::span<const double> block(const Block& b) const
  {
    return std::span<const double>(values).subspan(b.offset, b.length);
  }
  [[nodiscard]] std::span<const double> block(std::string_view name) const { return block(layout->block(name)); }

  [[nodiscard]] std::span<double> block(const Block& b)
  {
    return std::span<double>(values).subspan(b.offset, b.length);
  }
  [[nodiscard]] std::span<double> block(std::string_view name) { return block(layout->block(name)); }
};

[[nodiscard]] inline bool same_layout(const State& a, const State& b)
{
  return a.layout == b.layout || (a.layout && b.layout && *a.layout == *b.layout);
}

inline void require_compatible(const State& a, const State& b, const char* what)
{
  if (!same_layout(a, b)) {
    throw ShapeMismatch(std::string(what) + ": layout mismatch");
  }
}

/// ||a - b|| / ||b||, falling back to ||a - b|| when b vanishes.
[[nodiscard]] inline double relative_distance(const State& a, const State& b)
{
  require_compatible(a, b, "relative_distance");
  const double diff = distance2(a.values, b.values);
  const double ref = norm2(b.values);
  return ref > 0.0 ? diff / ref : diff;
}

} // namespace pint

#endif // PINT_STATE_HPP
