#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "pathex/qa/onnx.hpp"
#include "pathex/util/error.hpp"

namespace pathex::onnx {

using Shape = std::vector<std::int64_t>;

bool is_floating(ElemType t) {
  return t == ElemType::kFloat || t == ElemType::kDouble || t == ElemType::kFloat16;
}

namespace {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

std::size_t Tensor::numel() const { return shape_numel(shape); }

Tensor Tensor::floats(std::vector<std::int64_t> shape, std::vector<float> data) {
  Tensor t;
  t.type = ElemType::kFloat;
  t.shape = std::move(shape);
  t.f = std::move(data);
  return t;
}

Tensor Tensor::ints(std::vector<std::int64_t> shape, std::vector<std::int64_t> data,
                    ElemType type) {
  Tensor t;
  t.type = type;
  t.shape = std::move(shape);
  t.i = std::move(data);
  return t;
}

namespace {

// Raised inside operators; the session adds the node name.
[[noreturn]] void fail(const std::string& why) { throw Error(ErrorCode::kBackendFailure, why); }

Shape row_major_strides(const Shape& s) {
  Shape st(s.size(), 1);
  for (std::size_t k = s.size(); k-- > 1;) st[k - 1] = st[k] * s[k];
  return st;
}

std::size_t norm_axis(std::int64_t axis, std::size_t rank) {
  const auto r = static_cast<std::int64_t>(rank);
  if (axis < -r || axis >= r) fail("axis " + std::to_string(axis) + " out of range");
  return static_cast<std::size_t>(axis < 0 ? axis + r : axis);
}

// Source offset of every output element, visiting the output in row-major
// order; strides may be zero (broadcast) or negative (reversed slices).
std::vector<std::size_t> strided_offsets(const Shape& out, std::int64_t base, const Shape& strides) {
  const std::size_t n = shape_numel(out);
  std::vector<std::size_t> off(n);
  if (n == 0) return off;
  const std::size_t r = out.size();
  Shape idx(r, 0);
  std::int64_t cur = base;
  for (std::size_t e = 0; e < n; ++e) {
    off[e] = static_cast<std::size_t>(cur);
    for (std::size_t d = r; d-- > 0;) {
      cur += strides[d];
      if (++idx[d] < out[d]) break;
      cur -= strides[d] * out[d];
      idx[d] = 0;
    }
  }
  return off;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t k = 0; k < r; ++k) {
    const std::int64_t da = k + a.size() >= r ? a[k + a.size() - r] : 1;
    const std::int64_t db = k + b.size() >= r ? b[k + b.size() - r] : 1;
    if (da != db && da != 1 && db != 1) {
      fail("shapes cannot broadcast (" + std::to_string(da) + " vs " + std::to_string(db) + ")");
    }
    out[k] = da == 1 ? db : da;
  }
  return out;
}

std::vector<std::size_t> broadcast_offsets(const Shape& out, const Shape& in) {
  Shape strides(out.size(), 0);
  const Shape in_strides = row_major_strides(in);
  const std::size_t shift = out.size() - in.size();
  for (std::size_t k = 0; k < in.size(); ++k) {
    strides[k + shift] = in[k] == 1 ? 0 : in_strides[k];
  }
  return strided_offsets(out, 0, strides);
}

Tensor like(const Tensor& src, Shape shape) {
  Tensor t;
  t.type = src.type;
  t.shape = std::move(shape);
  if (src.floating()) t.f.resize(t.numel());
  else t.i.resize(t.numel());
  return t;
}

Tensor take(const Tensor& src, Shape shape, const std::vector<std::size_t>& offsets) {
  Tensor t = like(src, std::move(shape));
  if (src.floating()) {
    for (std::size_t k = 0; k < offsets.size(); ++k) t.f[k] = src.f[offsets[k]];
  } else {
    for (std::size_t k = 0; k < offsets.size(); ++k) t.i[k] = src.i[offsets[k]];
  }
  return t;
}

void copy_block(Tensor& dst, std::size_t dst_off, const Tensor& src, std::size_t src_off,
                std::size_t count) {
  if (src.floating()) {
    std::copy_n(src.f.begin() + static_cast<std::ptrdiff_t>(src_off), count,
                dst.f.begin() + static_cast<std::ptrdiff_t>(dst_off));
  } else {
    std::copy_n(src.i.begin() + static_cast<std::ptrdiff_t>(src_off), count,
                dst.i.begin() + static_cast<std::ptrdiff_t>(dst_off));
  }
}

Shape as_shape(const Tensor& t) {
  if (t.floating()) fail("expected an integer tensor");
  return t.i;
}

std::int64_t scalar_int(const Tensor& t) {
  if (t.numel() != 1) fail("expected a scalar");
  return t.floating() ? static_cast<std::int64_t>(t.f[0]) : t.i[0];
}

double scalar_value(const Tensor& t) {
  if (t.numel() != 1) fail("expected a scalar");
  return t.floating() ? t.f[0] : static_cast<double>(t.i[0]);
}

// ---- attributes --------------------------------------------------------

const Attribute* find_attr(const Node& n, const std::string& name) {
  auto it = n.attributes.find(name);
  return it == n.attributes.end() ? nullptr : &it->second;
}

std::int64_t attr_int(const Node& n, const std::string& name, std::int64_t fallback) {
  const auto* a = find_attr(n, name);
  return a ? a->i : fallback;
}

float attr_float(const Node& n, const std::string& name, float fallback) {
  const auto* a = find_attr(n, name);
  return a ? a->f : fallback;
}

std::optional<Shape> attr_ints(const Node& n, const std::string& name) {
  const auto* a = find_attr(n, name);
  if (!a) return std::nullopt;
  return a->ints;
}

// ---- operator plumbing -------------------------------------------------

using Inputs = std::vector<const Tensor*>;
using Outputs = std::vector<Tensor>;

struct Context {
  const Node& node;
  const Inputs& in;
  std::int64_t opset;

  const Tensor& at(std::size_t k) const {
    if (k >= in.size() || !in[k]) fail("missing input " + std::to_string(k));
    return *in[k];
  }
  const Tensor* optional(std::size_t k) const { return k < in.size() ? in[k] : nullptr; }
};

using OpFn = std::function<Outputs(const Context&)>;

Outputs one(Tensor t) {
  Outputs out;
  out.push_back(std::move(t));
  return out;
}

// ---- elementwise -------------------------------------------------------

template <class FF, class FI>
Tensor binary(const Tensor& a, const Tensor& b, FF ff, FI fi, std::optional<ElemType> result) {
  if (a.floating() != b.floating()) fail("operand types differ");
  const Shape shape = broadcast_shape(a.shape, b.shape);
  const std::size_t n = shape_numel(shape);
  Tensor out;
  out.shape = shape;
  out.type = result.value_or(a.type);
  const bool same = a.shape == shape && b.shape == shape;
  std::vector<std::size_t> ia, ib;
  if (!same) {
    ia = broadcast_offsets(shape, a.shape);
    ib = broadcast_offsets(shape, b.shape);
  }
  auto pa = [&](std::size_t k) { return same ? k : ia[k]; };
  auto pb = [&](std::size_t k) { return same ? k : ib[k]; };
  if (out.floating()) {
    out.f.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.f[k] = static_cast<float>(ff(a.f[pa(k)], b.f[pb(k)]));
  } else if (a.floating()) {
    out.i.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.i[k] = static_cast<std::int64_t>(ff(a.f[pa(k)], b.f[pb(k)]));
  } else {
    out.i.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.i[k] = static_cast<std::int64_t>(fi(a.i[pa(k)], b.i[pb(k)]));
  }
  return out;
}

template <class FF, class FI>
OpFn arith(FF ff, FI fi) {
  return [ff, fi](const Context& c) {
    Tensor acc = binary(c.at(0), c.at(1), ff, fi, std::nullopt);
    for (std::size_t k = 2; k < c.in.size(); ++k) acc = binary(acc, c.at(k), ff, fi, std::nullopt);
    return one(std::move(acc));
  };
}

template <class F>
OpFn compare(F f) {
  return [f](const Context& c) {
    return one(binary(c.at(0), c.at(1), [f](float x, float y) { return f(x, y) ? 1.0f : 0.0f; },
                      [f](std::int64_t x, std::int64_t y) { return f(x, y) ? 1 : 0; },
                      ElemType::kBool));
  };
}

template <class F>
OpFn logical(F f) {
  return [f](const Context& c) {
    return one(binary(c.at(0), c.at(1), [f](float x, float y) { return f(x != 0, y != 0) ? 1.0f : 0.0f; },
                      [f](std::int64_t x, std::int64_t y) { return f(x != 0, y != 0) ? 1 : 0; },
                      ElemType::kBool));
  };
}

template <class F>
OpFn unary_float(F f) {
  return [f](const Context& c) {
    const Tensor& x = c.at(0);
    if (!x.floating()) fail("expected a floating tensor");
    Tensor out = like(x, x.shape);
    for (std::size_t k = 0; k < x.f.size(); ++k) out.f[k] = static_cast<float>(f(x.f[k]));
    return one(std::move(out));
  };
}

template <class FF, class FI>
OpFn unary_any(FF ff, FI fi) {
  return [ff, fi](const Context& c) {
    const Tensor& x = c.at(0);
    Tensor out = like(x, x.shape);
    if (x.floating()) {
      for (std::size_t k = 0; k < x.f.size(); ++k) out.f[k] = static_cast<float>(ff(x.f[k]));
    } else {
      for (std::size_t k = 0; k < x.i.size(); ++k) out.i[k] = fi(x.i[k]);
    }
    return one(std::move(out));
  };
}

template <class F>
OpFn predicate(F f) {
  return [f](const Context& c) {
    const Tensor& x = c.at(0);
    Tensor out = Tensor::ints(x.shape, std::vector<std::int64_t>(x.numel()), ElemType::kBool);
    for (std::size_t k = 0; k < out.i.size(); ++k) {
      out.i[k] = x.floating() ? (f(x.f[k]) ? 1 : 0) : (f(static_cast<float>(x.i[k])) ? 1 : 0);
    }
    return one(std::move(out));
  };
}

Outputs op_not(const Context& c) {
  const Tensor& x = c.at(0);
  Tensor out = Tensor::ints(x.shape, std::vector<std::int64_t>(x.numel()), ElemType::kBool);
  for (std::size_t k = 0; k < out.i.size(); ++k) out.i[k] = x.i.at(k) ? 0 : 1;
  return one(std::move(out));
}

Outputs op_where(const Context& c) {
  const Tensor& cond = c.at(0);
  const Tensor& x = c.at(1);
  const Tensor& y = c.at(2);
  if (x.floating() != y.floating()) fail("Where branches differ in type");
  const Shape shape = broadcast_shape(broadcast_shape(cond.shape, x.shape), y.shape);
  const auto ic = broadcast_offsets(shape, cond.shape);
  const auto ix = broadcast_offsets(shape, x.shape);
  const auto iy = broadcast_offsets(shape, y.shape);
  Tensor out = like(x, shape);
  for (std::size_t k = 0; k < ic.size(); ++k) {
    const bool pick = cond.floating() ? cond.f[ic[k]] != 0 : cond.i[ic[k]] != 0;
    if (x.floating()) out.f[k] = pick ? x.f[ix[k]] : y.f[iy[k]];
    else out.i[k] = pick ? x.i[ix[k]] : y.i[iy[k]];
  }
  return one(std::move(out));
}

Tensor cast_to(const Tensor& x, ElemType to) {
  Tensor out;
  out.type = to;
  out.shape = x.shape;
  if (is_floating(to)) {
    if (x.floating()) {
      out.f = x.f;
    } else {
      out.f.resize(x.i.size());
      for (std::size_t k = 0; k < x.i.size(); ++k) out.f[k] = static_cast<float>(x.i[k]);
    }
    return out;
  }
  out.i.resize(x.numel());
  for (std::size_t k = 0; k < out.i.size(); ++k) {
    std::int64_t v;
    if (x.floating()) {
      const float f = x.f[k];
      if (to == ElemType::kBool) {
        v = f != 0.0f ? 1 : 0;
      } else if (std::isnan(f)) {
        v = 0;
      } else {
        const double clamped = std::clamp(static_cast<double>(f), -9.2e18, 9.2e18);
        v = static_cast<std::int64_t>(clamped);
      }
    } else {
      v = x.i[k];
    }
    switch (to) {
      case ElemType::kBool: v = v != 0 ? 1 : 0; break;
      case ElemType::kInt32: v = static_cast<std::int32_t>(v); break;
      case ElemType::kUint32: v = static_cast<std::uint32_t>(v); break;
      case ElemType::kInt16: v = static_cast<std::int16_t>(v); break;
      case ElemType::kUint16: v = static_cast<std::uint16_t>(v); break;
      case ElemType::kInt8: v = static_cast<std::int8_t>(v); break;
      case ElemType::kUint8: v = static_cast<std::uint8_t>(v); break;
      default: break;
    }
    out.i[k] = v;
  }
  return out;
}

Outputs op_cast(const Context& c) {
  const auto to = static_cast<ElemType>(attr_int(c.node, "to", 1));
  if (to == ElemType::kString) fail("cast to string is not supported");
  return one(cast_to(c.at(0), to));
}

Outputs op_cast_like(const Context& c) { return one(cast_to(c.at(0), c.at(1).type)); }

// ---- shape manipulation ------------------------------------------------

Outputs op_identity(const Context& c) { return one(c.at(0)); }

Outputs op_dropout(const Context& c) {
  Outputs out = one(c.at(0));
  if (c.node.outputs.size() > 1 && !c.node.outputs[1].empty()) {
    out.push_back(Tensor::ints(c.at(0).shape, std::vector<std::int64_t>(c.at(0).numel(), 1),
                               ElemType::kBool));
  }
  return out;
}

Outputs op_shape(const Context& c) {
  const Shape& s = c.at(0).shape;
  const auto r = static_cast<std::int64_t>(s.size());
  std::int64_t start = attr_int(c.node, "start", 0);
  std::int64_t end = attr_int(c.node, "end", r);
  if (start < 0) start += r;
  if (end < 0) end += r;
  start = std::clamp<std::int64_t>(start, 0, r);
  end = std::clamp<std::int64_t>(end, 0, r);
  Shape dims(s.begin() + start, s.begin() + std::max(start, end));
  const auto n = static_cast<std::int64_t>(dims.size());
  return one(Tensor::ints({n}, std::move(dims)));
}

Outputs op_size(const Context& c) {
  return one(Tensor::ints({}, {static_cast<std::int64_t>(c.at(0).numel())}));
}

Outputs op_constant(const Context& c) {
  const Node& n = c.node;
  if (const auto* a = find_attr(n, "value")) return one(a->t);
  if (const auto* a = find_attr(n, "value_float")) return one(Tensor::floats({}, {a->f}));
  if (const auto* a = find_attr(n, "value_floats")) {
    return one(Tensor::floats({static_cast<std::int64_t>(a->floats.size())}, a->floats));
  }
  if (const auto* a = find_attr(n, "value_int")) return one(Tensor::ints({}, {a->i}));
  if (const auto* a = find_attr(n, "value_ints")) {
    return one(Tensor::ints({static_cast<std::int64_t>(a->ints.size())}, a->ints));
  }
  fail("Constant without a supported value attribute");
}

Outputs op_constant_of_shape(const Context& c) {
  const Shape shape = as_shape(c.at(0));
  Tensor value = Tensor::floats({1}, {0.0f});
  if (const auto* a = find_attr(c.node, "value")) value = a->t;
  if (value.numel() != 1) fail("ConstantOfShape value must hold one element");
  Tensor out = like(value, shape);
  if (value.floating()) std::fill(out.f.begin(), out.f.end(), value.f[0]);
  else std::fill(out.i.begin(), out.i.end(), value.i[0]);
  return one(std::move(out));
}

Outputs op_reshape(const Context& c) {
  const Tensor& x = c.at(0);
  Shape target = as_shape(c.at(1));
  const bool allowzero = attr_int(c.node, "allowzero", 0) != 0;
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (target[k] == 0 && !allowzero) {
      if (k >= x.shape.size()) fail("Reshape copies a missing dimension");
      target[k] = x.shape[k];
    }
    if (target[k] == -1) {
      if (infer >= 0) fail("Reshape has more than one -1");
      infer = static_cast<int>(k);
    } else {
      known *= target[k];
    }
  }
  const auto total = static_cast<std::int64_t>(x.numel());
  if (infer >= 0) {
    if (known == 0 || total % known != 0) fail("Reshape cannot infer a dimension");
    target[static_cast<std::size_t>(infer)] = total / known;
  } else if (known != total) {
    fail("Reshape changes the element count");
  }
  Tensor out = x;
  out.shape = std::move(target);
  return one(std::move(out));
}

Outputs op_flatten(const Context& c) {
  const Tensor& x = c.at(0);
  const auto r = x.shape.size();
  std::int64_t axis = attr_int(c.node, "axis", 1);
  if (axis < 0) axis += static_cast<std::int64_t>(r);
  if (axis < 0 || axis > static_cast<std::int64_t>(r)) fail("Flatten axis out of range");
  std::int64_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < r; ++k) (static_cast<std::int64_t>(k) < axis ? outer : inner) *= x.shape[k];
  Tensor out = x;
  out.shape = {outer, inner};
  return one(std::move(out));
}

Shape axes_input(const Context& c, std::size_t input, const char* attr) {
  if (c.opset >= 13) {
    if (const Tensor* t = c.optional(input)) return as_shape(*t);
    return {};
  }
  return attr_ints(c.node, attr).value_or(Shape{});
}

Outputs op_unsqueeze(const Context& c) {
  const Tensor& x = c.at(0);
  const Shape axes = axes_input(c, 1, "axes");
  const std::size_t rank = x.shape.size() + axes.size();
  std::vector<bool> inserted(rank, false);
  for (auto a : axes) inserted[norm_axis(a, rank)] = true;
  Shape shape;
  std::size_t src = 0;
  for (std::size_t k = 0; k < rank; ++k) shape.push_back(inserted[k] ? 1 : x.shape.at(src++));
  Tensor out = x;
  out.shape = std::move(shape);
  return one(std::move(out));
}

Outputs op_squeeze(const Context& c) {
  const Tensor& x = c.at(0);
  const Shape axes = axes_input(c, 1, "axes");
  std::vector<bool> drop(x.shape.size(), false);
  if (axes.empty()) {
    for (std::size_t k = 0; k < x.shape.size(); ++k) drop[k] = x.shape[k] == 1;
  } else {
    for (auto a : axes) {
      const auto k = norm_axis(a, x.shape.size());
      if (x.shape[k] != 1) fail("Squeeze of a dimension that is not 1");
      drop[k] = true;
    }
  }
  Shape shape;
  for (std::size_t k = 0; k < x.shape.size(); ++k) {
    if (!drop[k]) shape.push_back(x.shape[k]);
  }
  Tensor out = x;
  out.shape = std::move(shape);
  return one(std::move(out));
}

Outputs op_concat(const Context& c) {
  std::vector<const Tensor*> parts;
  for (const auto* t : c.in) {
    if (t) parts.push_back(t);
  }
  if (parts.empty()) fail("Concat without inputs");
  const auto rank = parts[0]->shape.size();
  const auto axis = norm_axis(attr_int(c.node, "axis", 0), rank);
  Shape shape = parts[0]->shape;
  shape[axis] = 0;
  for (const auto* t : parts) {
    if (t->shape.size() != rank) fail("Concat rank mismatch");
    for (std::size_t k = 0; k < rank; ++k) {
      if (k != axis && t->shape[k] != parts[0]->shape[k]) fail("Concat shape mismatch");
    }
    if (t->floating() != parts[0]->floating()) fail("Concat type mismatch");
    shape[axis] += t->shape[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(shape[k]);
  for (std::size_t k = axis + 1; k < rank; ++k) inner *= static_cast<std::size_t>(shape[k]);
  Tensor out = like(*parts[0], shape);
  const std::size_t out_row = static_cast<std::size_t>(shape[axis]) * inner;
  std::size_t col = 0;
  for (const auto* t : parts) {
    const std::size_t row = static_cast<std::size_t>(t->shape[axis]) * inner;
    for (std::size_t o = 0; o < outer; ++o) copy_block(out, o * out_row + col, *t, o * row, row);
    col += row;
  }
  return one(std::move(out));
}

Outputs op_split(const Context& c) {
  const Tensor& x = c.at(0);
  const auto axis = norm_axis(attr_int(c.node, "axis", 0), x.shape.size());
  const std::int64_t dim = x.shape[axis];
  Shape sizes;
  if (const Tensor* s = c.optional(1)) {
    sizes = as_shape(*s);
  } else if (auto a = attr_ints(c.node, "split")) {
    sizes = *a;
  } else {
    const auto parts = attr_int(c.node, "num_outputs", static_cast<std::int64_t>(c.node.outputs.size()));
    if (parts <= 0) fail("Split into zero parts");
    const std::int64_t each = (dim + parts - 1) / parts;
    for (std::int64_t p = 0, left = dim; p < parts; ++p, left -= each) {
      sizes.push_back(std::max<std::int64_t>(0, std::min(each, left)));
    }
  }
  if (std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}) != dim) {
    fail("Split sizes do not cover the axis");
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(x.shape[k]);
  for (std::size_t k = axis + 1; k < x.shape.size(); ++k) inner *= static_cast<std::size_t>(x.shape[k]);
  Outputs outs;
  std::int64_t start = 0;
  for (auto size : sizes) {
    Shape shape = x.shape;
    shape[axis] = size;
    Tensor t = like(x, shape);
    const std::size_t row = static_cast<std::size_t>(size) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      copy_block(t, o * row, x, o * static_cast<std::size_t>(dim) * inner + static_cast<std::size_t>(start) * inner, row);
    }
    outs.push_back(std::move(t));
    start += size;
  }
  return outs;
}

Outputs op_slice(const Context& c) {
  const Tensor& x = c.at(0);
  const auto rank = x.shape.size();
  Shape starts, ends, axes, steps;
  if (c.opset >= 10) {
    starts = as_shape(c.at(1));
    ends = as_shape(c.at(2));
    if (const Tensor* a = c.optional(3)) axes = as_shape(*a);
    if (const Tensor* s = c.optional(4)) steps = as_shape(*s);
  } else {
    starts = attr_ints(c.node, "starts").value_or(Shape{});
    ends = attr_ints(c.node, "ends").value_or(Shape{});
    axes = attr_ints(c.node, "axes").value_or(Shape{});
  }
  if (axes.empty()) {
    for (std::size_t k = 0; k < starts.size(); ++k) axes.push_back(static_cast<std::int64_t>(k));
  }
  if (steps.empty()) steps.assign(starts.size(), 1);
  if (ends.size() != starts.size() || axes.size() != starts.size() || steps.size() != starts.size()) {
    fail("Slice argument lengths differ");
  }
  Shape out_shape = x.shape;
  Shape first(rank, 0), step(rank, 1);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto a = norm_axis(axes[k], rank);
    const std::int64_t d = x.shape[a];
    const std::int64_t s = steps[k];
    if (s == 0) fail("Slice step is zero");
    std::int64_t b = starts[k], e = ends[k];
    if (b < 0) b += d;
    if (e < 0) e += d;
    std::int64_t count;
    if (s > 0) {
      b = std::clamp<std::int64_t>(b, 0, d);
      e = std::clamp<std::int64_t>(e, 0, d);
      count = e > b ? (e - b + s - 1) / s : 0;
    } else {
      b = std::clamp<std::int64_t>(b, 0, d - 1);
      e = std::clamp<std::int64_t>(e, -1, d - 1);
      count = b > e ? (b - e - s - 1) / -s : 0;
    }
    out_shape[a] = count;
    first[a] = b;
    step[a] = s;
  }
  const Shape in_strides = row_major_strides(x.shape);
  std::int64_t base = 0;
  Shape strides(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    if (out_shape[k] > 0) base += first[k] * in_strides[k];
    strides[k] = step[k] * in_strides[k];
  }
  return one(take(x, out_shape, strided_offsets(out_shape, base, strides)));
}

Outputs op_transpose(const Context& c) {
  const Tensor& x = c.at(0);
  const auto rank = x.shape.size();
  Shape perm = attr_ints(c.node, "perm").value_or(Shape{});
  if (perm.empty()) {
    for (std::size_t k = rank; k-- > 0;) perm.push_back(static_cast<std::int64_t>(k));
  }
  if (perm.size() != rank) fail("Transpose perm has the wrong length");
  const Shape in_strides = row_major_strides(x.shape);
  Shape shape(rank), strides(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const auto p = norm_axis(perm[k], rank);
    shape[k] = x.shape[p];
    strides[k] = in_strides[p];
  }
  return one(take(x, shape, strided_offsets(shape, 0, strides)));
}

Outputs op_expand(const Context& c) {
  const Tensor& x = c.at(0);
  const Shape shape = broadcast_shape(x.shape, as_shape(c.at(1)));
  return one(take(x, shape, broadcast_offsets(shape, x.shape)));
}

Outputs op_tile(const Context& c) {
  const Tensor& x = c.at(0);
  const Shape reps = as_shape(c.at(1));
  if (reps.size() != x.shape.size()) fail("Tile repeats have the wrong length");
  Shape shape(x.shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) shape[k] = x.shape[k] * reps[k];
  const Shape in_strides = row_major_strides(x.shape);
  std::vector<std::size_t> offsets(shape_numel(shape));
  Shape idx(shape.size(), 0);
  for (auto& off : offsets) {
    std::int64_t o = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) o += (idx[k] % x.shape[k]) * in_strides[k];
    off = static_cast<std::size_t>(o);
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d]) break;
      idx[d] = 0;
    }
  }
  return one(take(x, shape, offsets));
}

std::int64_t wrap_index(std::int64_t idx, std::int64_t dim) {
  if (idx < 0) idx += dim;
  if (idx < 0 || idx >= dim) fail("index " + std::to_string(idx) + " out of range");
  return idx;
}

Outputs op_gather(const Context& c) {
  const Tensor& data = c.at(0);
  const Tensor& indices = c.at(1);
  const auto axis = norm_axis(attr_int(c.node, "axis", 0), data.shape.size());
  Shape shape(data.shape.begin(), data.shape.begin() + static_cast<std::ptrdiff_t>(axis));
  shape.insert(shape.end(), indices.shape.begin(), indices.shape.end());
  shape.insert(shape.end(), data.shape.begin() + static_cast<std::ptrdiff_t>(axis) + 1, data.shape.end());
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(data.shape[k]);
  for (std::size_t k = axis + 1; k < data.shape.size(); ++k) inner *= static_cast<std::size_t>(data.shape[k]);
  const std::int64_t dim = data.shape[axis];
  const Shape idx = as_shape(indices);
  Tensor out = like(data, shape);
  std::size_t dst = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    for (auto raw : idx) {
      const auto i = static_cast<std::size_t>(wrap_index(raw, dim));
      copy_block(out, dst, data, (o * static_cast<std::size_t>(dim) + i) * inner, inner);
      dst += inner;
    }
  }
  return one(std::move(out));
}

Outputs op_gather_elements(const Context& c) {
  const Tensor& data = c.at(0);
  const Tensor& indices = c.at(1);
  const auto rank = data.shape.size();
  const auto axis = norm_axis(attr_int(c.node, "axis", 0), rank);
  if (indices.shape.size() != rank) fail("GatherElements rank mismatch");
  const Shape in_strides = row_major_strides(data.shape);
  const Shape idx = as_shape(indices);
  std::vector<std::size_t> offsets(idx.size());
  Shape pos(rank, 0);
  for (std::size_t e = 0; e < idx.size(); ++e) {
    std::int64_t o = 0;
    for (std::size_t k = 0; k < rank; ++k) {
      const std::int64_t coord = k == axis ? wrap_index(idx[e], data.shape[k]) : pos[k];
      if (coord >= data.shape[k]) fail("GatherElements index out of range");
      o += coord * in_strides[k];
    }
    offsets[e] = static_cast<std::size_t>(o);
    for (std::size_t d = rank; d-- > 0;) {
      if (++pos[d] < indices.shape[d]) break;
      pos[d] = 0;
    }
  }
  return one(take(data, indices.shape, offsets));
}

Outputs op_gather_nd(const Context& c) {
  const Tensor& data = c.at(0);
  const Tensor& indices = c.at(1);
  const auto b = static_cast<std::size_t>(attr_int(c.node, "batch_dims", 0));
  if (indices.shape.empty()) fail("GatherND indices must have rank >= 1");
  const auto k = static_cast<std::size_t>(indices.shape.back());
  if (b + k > data.shape.size()) fail("GatherND index depth too large");
  Shape shape(indices.shape.begin(), indices.shape.end() - 1);
  shape.insert(shape.end(), data.shape.begin() + static_cast<std::ptrdiff_t>(b + k), data.shape.end());
  std::size_t batches = 1, per_batch = 1, slice = 1;
  for (std::size_t d = 0; d < b; ++d) batches *= static_cast<std::size_t>(data.shape[d]);
  for (std::size_t d = b; d + 1 < indices.shape.size(); ++d) per_batch *= static_cast<std::size_t>(indices.shape[d]);
  for (std::size_t d = b + k; d < data.shape.size(); ++d) slice *= static_cast<std::size_t>(data.shape[d]);
  const Shape in_strides = row_major_strides(data.shape);
  const std::size_t batch_stride = b == 0 ? data.numel() : static_cast<std::size_t>(in_strides[b - 1]);
  const Shape idx = as_shape(indices);
  Tensor out = like(data, shape);
  std::size_t dst = 0;
  for (std::size_t bb = 0; bb < batches; ++bb) {
    for (std::size_t n = 0; n < per_batch; ++n) {
      const std::size_t row = (bb * per_batch + n) * k;
      std::size_t off = bb * batch_stride;
      for (std::size_t j = 0; j < k; ++j) {
        off += static_cast<std::size_t>(wrap_index(idx[row + j], data.shape[b + j]) * in_strides[b + j]);
      }
      copy_block(out, dst, data, off, slice);
      dst += slice;
    }
  }
  return one(std::move(out));
}

Outputs op_range(const Context& c) {
  const Tensor& start = c.at(0);
  const double s = scalar_value(start);
  const double limit = scalar_value(c.at(1));
  const double delta = scalar_value(c.at(2));
  if (delta == 0) fail("Range delta is zero");
  const auto n = static_cast<std::int64_t>(std::max(0.0, std::ceil((limit - s) / delta)));
  Tensor out = like(start, {n});
  for (std::int64_t k = 0; k < n; ++k) {
    if (start.floating()) out.f[static_cast<std::size_t>(k)] = static_cast<float>(s + static_cast<double>(k) * delta);
    else out.i[static_cast<std::size_t>(k)] = start.i[0] + k * c.at(2).i[0];
  }
  return one(std::move(out));
}

Outputs op_cumsum(const Context& c) {
  const Tensor& x = c.at(0);
  const auto axis = norm_axis(scalar_int(c.at(1)), x.shape.size());
  const bool exclusive = attr_int(c.node, "exclusive", 0) != 0;
  const bool reverse = attr_int(c.node, "reverse", 0) != 0;
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(x.shape[k]);
  for (std::size_t k = axis + 1; k < x.shape.size(); ++k) inner *= static_cast<std::size_t>(x.shape[k]);
  const auto dim = static_cast<std::size_t>(x.shape[axis]);
  Tensor out = like(x, x.shape);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      double accf = 0.0;
      std::int64_t acci = 0;
      for (std::size_t step = 0; step < dim; ++step) {
        const std::size_t j = reverse ? dim - 1 - step : step;
        const std::size_t at = (o * dim + j) * inner + in;
        if (x.floating()) {
          if (exclusive) { out.f[at] = static_cast<float>(accf); accf += x.f[at]; }
          else { accf += x.f[at]; out.f[at] = static_cast<float>(accf); }
        } else {
          if (exclusive) { out.i[at] = acci; acci += x.i[at]; }
          else { acci += x.i[at]; out.i[at] = acci; }
        }
      }
    }
  }
  return one(std::move(out));
}

// ---- reductions and normalization --------------------------------------

// Views a tensor as [outer, dim, inner] around `axis`.
struct AxisView {
  std::size_t outer = 1, dim = 1, inner = 1;
  AxisView(const Shape& s, std::size_t axis) {
    for (std::size_t k = 0; k < axis; ++k) outer *= static_cast<std::size_t>(s[k]);
    dim = static_cast<std::size_t>(s[axis]);
    for (std::size_t k = axis + 1; k < s.size(); ++k) inner *= static_cast<std::size_t>(s[k]);
  }
};

Tensor softmax_rows(const Tensor& x, std::size_t outer, std::size_t dim, std::size_t inner, bool log) {
  if (!x.floating()) fail("Softmax needs a floating tensor");
  Tensor out = like(x, x.shape);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      auto at = [&](std::size_t j) { return (o * dim + j) * inner + in; };
      float mx = -std::numeric_limits<float>::infinity();
      for (std::size_t j = 0; j < dim; ++j) mx = std::max(mx, x.f[at(j)]);
      double sum = 0.0;
      for (std::size_t j = 0; j < dim; ++j) sum += std::exp(static_cast<double>(x.f[at(j)] - mx));
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = static_cast<double>(x.f[at(j)] - mx);
        out.f[at(j)] = static_cast<float>(log ? v - std::log(sum) : std::exp(v) / sum);
      }
    }
  }
  return out;
}

OpFn softmax(bool log) {
  return [log](const Context& c) {
    const Tensor& x = c.at(0);
    if (c.opset >= 13) {
      const auto axis = norm_axis(attr_int(c.node, "axis", -1), x.shape.size());
      const AxisView v(x.shape, axis);
      return one(softmax_rows(x, v.outer, v.dim, v.inner, log));
    }
    const auto axis = norm_axis(attr_int(c.node, "axis", 1), x.shape.size());
    std::size_t outer = 1, dim = 1;
    for (std::size_t k = 0; k < x.shape.size(); ++k) (k < axis ? outer : dim) *= static_cast<std::size_t>(x.shape[k]);
    return one(softmax_rows(x, outer, dim, 1, log));
  };
}

Outputs op_layer_norm(const Context& c) {
  const Tensor& x = c.at(0);
  const Tensor& scale = c.at(1);
  const Tensor* bias = c.optional(2);
  if (!x.floating()) fail("LayerNormalization needs a floating tensor");
  const auto axis = norm_axis(attr_int(c.node, "axis", -1), x.shape.size());
  const double eps = attr_float(c.node, "epsilon", 1e-5f);
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < x.shape.size(); ++k) (k < axis ? outer : inner) *= static_cast<std::size_t>(x.shape[k]);
  auto param = [inner](const Tensor& t, std::size_t j) {
    if (t.numel() == 1) return t.f[0];
    if (t.numel() != inner) fail("LayerNormalization parameter shape mismatch");
    return t.f[j];
  };
  Shape stat_shape = x.shape;
  for (std::size_t k = axis; k < stat_shape.size(); ++k) stat_shape[k] = 1;
  Tensor y = like(x, x.shape);
  Tensor mean = Tensor::floats(stat_shape, std::vector<float>(outer));
  Tensor inv = Tensor::floats(stat_shape, std::vector<float>(outer));
  for (std::size_t o = 0; o < outer; ++o) {
    const float* row = x.f.data() + o * inner;
    double mu = 0.0;
    for (std::size_t j = 0; j < inner; ++j) mu += row[j];
    mu /= static_cast<double>(inner);
    double var = 0.0;
    for (std::size_t j = 0; j < inner; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(inner);
    const double r = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < inner; ++j) {
      double v = (row[j] - mu) * r * param(scale, j);
      if (bias) v += param(*bias, j);
      y.f[o * inner + j] = static_cast<float>(v);
    }
    mean.f[o] = static_cast<float>(mu);
    inv.f[o] = static_cast<float>(r);
  }
  Outputs out;
  out.push_back(std::move(y));
  out.push_back(std::move(mean));
  out.push_back(std::move(inv));
  return out;
}

enum class Reduce { kSum, kMean, kMax, kMin };

OpFn reduce(Reduce kind, std::int64_t axes_input_from) {
  return [kind, axes_input_from](const Context& c) {
    const Tensor& x = c.at(0);
    Shape axes;
    if (c.opset >= axes_input_from) {
      if (const Tensor* a = c.optional(1)) axes = as_shape(*a);
    } else {
      axes = attr_ints(c.node, "axes").value_or(Shape{});
    }
    const bool keepdims = attr_int(c.node, "keepdims", 1) != 0;
    if (axes.empty() && attr_int(c.node, "noop_with_empty_axes", 0) != 0) return one(x);
    const auto rank = x.shape.size();
    std::vector<bool> reduced(rank, axes.empty());
    for (auto a : axes) reduced[norm_axis(a, rank)] = true;
    Shape kept = x.shape;
    for (std::size_t k = 0; k < rank; ++k) {
      if (reduced[k]) kept[k] = 1;
    }
    const std::size_t n = shape_numel(kept);
    std::vector<double> acc(n, kind == Reduce::kMax ? -INFINITY : kind == Reduce::kMin ? INFINITY : 0.0);
    std::vector<std::size_t> count(n, 0);
    // Output slot of every input element.
    const Shape kept_strides = row_major_strides(kept);
    Shape strides(rank);
    for (std::size_t k = 0; k < rank; ++k) strides[k] = reduced[k] ? 0 : kept_strides[k];
    const auto slot = strided_offsets(x.shape, 0, strides);
    for (std::size_t e = 0; e < slot.size(); ++e) {
      const double v = x.floating() ? x.f[e] : static_cast<double>(x.i[e]);
      double& a = acc[slot[e]];
      switch (kind) {
        case Reduce::kSum: case Reduce::kMean: a += v; break;
        case Reduce::kMax: a = std::max(a, v); break;
        case Reduce::kMin: a = std::min(a, v); break;
      }
      ++count[slot[e]];
    }
    Shape shape;
    for (std::size_t k = 0; k < rank; ++k) {
      if (!reduced[k]) shape.push_back(x.shape[k]);
      else if (keepdims) shape.push_back(1);
    }
    Tensor out = like(x, shape);
    for (std::size_t k = 0; k < n; ++k) {
      const double v = kind == Reduce::kMean && count[k] ? acc[k] / static_cast<double>(count[k]) : acc[k];
      if (out.floating()) out.f[k] = static_cast<float>(v);
      else out.i[k] = static_cast<std::int64_t>(v);
    }
    return one(std::move(out));
  };
}

// ---- linear algebra ----------------------------------------------------

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Outputs op_matmul(const Context& c) {
  Tensor a = c.at(0);
  Tensor b = c.at(1);
  if (!a.floating() || !b.floating()) fail("MatMul supports floating tensors only");
  const bool a_vec = a.shape.size() == 1, b_vec = b.shape.size() == 1;
  if (a_vec) a.shape.insert(a.shape.begin(), 1);
  if (b_vec) b.shape.push_back(1);
  if (a.shape.size() < 2 || b.shape.size() < 2) fail("MatMul operands need rank >= 1");
  const std::int64_t m = a.shape[a.shape.size() - 2], k = a.shape.back();
  const std::int64_t k2 = b.shape[b.shape.size() - 2], n = b.shape.back();
  if (k != k2) fail("MatMul inner dimensions differ (" + std::to_string(k) + " vs " + std::to_string(k2) + ")");
  const Shape a_batch(a.shape.begin(), a.shape.end() - 2), b_batch(b.shape.begin(), b.shape.end() - 2);
  const Shape batch = broadcast_shape(a_batch, b_batch);
  const auto ia = broadcast_offsets(batch, a_batch);
  const auto ib = broadcast_offsets(batch, b_batch);
  Shape shape = batch;
  shape.push_back(m);
  shape.push_back(n);
  Tensor out = Tensor::floats(shape, std::vector<float>(shape_numel(shape)));
  const auto mk = static_cast<std::size_t>(m * k), kn = static_cast<std::size_t>(k * n),
             mn = static_cast<std::size_t>(m * n);
  for (std::size_t t = 0; t < ia.size(); ++t) {
    Eigen::Map<const RowMatrix> ma(a.f.data() + ia[t] * mk, m, k);
    Eigen::Map<const RowMatrix> mb(b.f.data() + ib[t] * kn, k, n);
    Eigen::Map<RowMatrix> mo(out.f.data() + t * mn, m, n);
    mo.noalias() = ma * mb;
  }
  if (a_vec) out.shape.erase(out.shape.end() - 2);
  if (b_vec) out.shape.pop_back();
  return one(std::move(out));
}

Outputs op_gemm(const Context& c) {
  const Tensor& a = c.at(0);
  const Tensor& b = c.at(1);
  const Tensor* bias = c.optional(2);
  if (a.shape.size() != 2 || b.shape.size() != 2) fail("Gemm needs 2-D operands");
  const bool ta = attr_int(c.node, "transA", 0) != 0;
  const bool tb = attr_int(c.node, "transB", 0) != 0;
  const float alpha = attr_float(c.node, "alpha", 1.0f);
  const float beta = attr_float(c.node, "beta", 1.0f);
  Eigen::Map<const RowMatrix> ma(a.f.data(), a.shape[0], a.shape[1]);
  Eigen::Map<const RowMatrix> mb(b.f.data(), b.shape[0], b.shape[1]);
  RowMatrix prod;
  if (ta && tb) prod = ma.transpose() * mb.transpose();
  else if (ta) prod = ma.transpose() * mb;
  else if (tb) prod = ma * mb.transpose();
  else {
    if (ma.cols() != mb.rows()) fail("Gemm inner dimensions differ");
    prod = ma * mb;
  }
  prod *= alpha;
  Shape shape{prod.rows(), prod.cols()};
  Tensor out = Tensor::floats(shape, std::vector<float>(prod.data(), prod.data() + prod.size()));
  if (bias && beta != 0.0f) {
    const auto off = broadcast_offsets(shape, bias->shape);
    for (std::size_t k = 0; k < off.size(); ++k) out.f[k] += beta * bias->f[off[k]];
  }
  return one(std::move(out));
}

Outputs op_gelu(const Context& c) {
  const Tensor& x = c.at(0);
  const auto* approx = find_attr(c.node, "approximate");
  const bool tanh_form = approx && approx->s == "tanh";
  Tensor out = like(x, x.shape);
  for (std::size_t k = 0; k < x.f.size(); ++k) {
    const double v = x.f[k];
    const double g = tanh_form ? 0.5 * v * (1.0 + std::tanh(0.7978845608028654 * (v + 0.044715 * v * v * v)))
                               : 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    out.f[k] = static_cast<float>(g);
  }
  return one(std::move(out));
}

const std::unordered_map<std::string, OpFn>& registry() {
  static const std::unordered_map<std::string, OpFn> ops = [] {
    std::unordered_map<std::string, OpFn> m;
    auto idiv = [](std::int64_t x, std::int64_t y) -> std::int64_t {
      if (y == 0) fail("integer division by zero");
      return x / y;
    };
    auto imod = [](std::int64_t x, std::int64_t y) -> std::int64_t {
      if (y == 0) fail("integer modulo by zero");
      const std::int64_t r = x % y;
      return (r != 0 && ((r < 0) != (y < 0))) ? r + y : r;
    };
    m["Add"] = arith([](float x, float y) { return x + y; }, [](std::int64_t x, std::int64_t y) { return x + y; });
    m["Sum"] = m["Add"];
    m["Sub"] = arith([](float x, float y) { return x - y; }, [](std::int64_t x, std::int64_t y) { return x - y; });
    m["Mul"] = arith([](float x, float y) { return x * y; }, [](std::int64_t x, std::int64_t y) { return x * y; });
    m["Div"] = arith([](float x, float y) { return x / y; }, idiv);
    m["Mod"] = arith([](float x, float y) { return std::fmod(x, y); }, imod);
    m["Pow"] = arith([](float x, float y) { return std::pow(x, y); },
                     [](std::int64_t x, std::int64_t y) {
                       return static_cast<std::int64_t>(std::pow(static_cast<double>(x), static_cast<double>(y)));
                     });
    m["Max"] = arith([](float x, float y) { return std::max(x, y); },
                     [](std::int64_t x, std::int64_t y) { return std::max(x, y); });
    m["Min"] = arith([](float x, float y) { return std::min(x, y); },
                     [](std::int64_t x, std::int64_t y) { return std::min(x, y); });
    m["Equal"] = compare([](auto x, auto y) { return x == y; });
    m["Less"] = compare([](auto x, auto y) { return x < y; });
    m["LessOrEqual"] = compare([](auto x, auto y) { return x <= y; });
    m["Greater"] = compare([](auto x, auto y) { return x > y; });
    m["GreaterOrEqual"] = compare([](auto x, auto y) { return x >= y; });
    m["And"] = logical([](bool x, bool y) { return x && y; });
    m["Or"] = logical([](bool x, bool y) { return x || y; });
    m["Xor"] = logical([](bool x, bool y) { return x != y; });
    m["Not"] = op_not;
    m["Where"] = op_where;
    m["Neg"] = unary_any([](float x) { return -x; }, [](std::int64_t x) { return -x; });
    m["Abs"] = unary_any([](float x) { return std::fabs(x); }, [](std::int64_t x) { return x < 0 ? -x : x; });
    m["Sqrt"] = unary_float([](float x) { return std::sqrt(x); });
    m["Exp"] = unary_float([](float x) { return std::exp(x); });
    m["Log"] = unary_float([](float x) { return std::log(x); });
    m["Erf"] = unary_float([](float x) { return std::erf(x); });
    m["Tanh"] = unary_float([](float x) { return std::tanh(x); });
    m["Relu"] = unary_float([](float x) { return x > 0 ? x : 0.0f; });
    m["Sigmoid"] = unary_float([](float x) { return 1.0 / (1.0 + std::exp(-static_cast<double>(x))); });
    m["Reciprocal"] = unary_float([](float x) { return 1.0f / x; });
    m["Floor"] = unary_float([](float x) { return std::floor(x); });
    m["Ceil"] = unary_float([](float x) { return std::ceil(x); });
    m["IsNaN"] = predicate([](float x) { return std::isnan(x); });
    m["IsInf"] = predicate([](float x) { return std::isinf(x); });
    m["Gelu"] = op_gelu;
    m["Cast"] = op_cast;
    m["CastLike"] = op_cast_like;
    m["Identity"] = op_identity;
    m["Dropout"] = op_dropout;
    m["Shape"] = op_shape;
    m["Size"] = op_size;
    m["Constant"] = op_constant;
    m["ConstantOfShape"] = op_constant_of_shape;
    m["Reshape"] = op_reshape;
    m["Flatten"] = op_flatten;
    m["Unsqueeze"] = op_unsqueeze;
    m["Squeeze"] = op_squeeze;
    m["Concat"] = op_concat;
    m["Split"] = op_split;
    m["Slice"] = op_slice;
    m["Transpose"] = op_transpose;
    m["Expand"] = op_expand;
    m["Tile"] = op_tile;
    m["Gather"] = op_gather;
    m["GatherElements"] = op_gather_elements;
    m["GatherND"] = op_gather_nd;
    m["Range"] = op_range;
    m["CumSum"] = op_cumsum;
    m["Softmax"] = softmax(false);
    m["LogSoftmax"] = softmax(true);
    m["LayerNormalization"] = op_layer_norm;
    m["ReduceSum"] = reduce(Reduce::kSum, 13);
    m["ReduceMean"] = reduce(Reduce::kMean, 18);
    m["ReduceMax"] = reduce(Reduce::kMax, 18);
    m["ReduceMin"] = reduce(Reduce::kMin, 18);
    m["MatMul"] = op_matmul;
    m["Gemm"] = op_gemm;
    return m;
  }();
  return ops;
}

}  // namespace

bool supports_op(std::string_view op_type) { return registry().count(std::string(op_type)) > 0; }

Session::Session(Graph graph) : graph_(std::move(graph)) {
  std::map<std::string, std::size_t> last_use;
  for (std::size_t k = 0; k < graph_.nodes.size(); ++k) {
    const Node& n = graph_.nodes[k];
    if (!n.domain.empty() && n.domain != "ai.onnx") {
      throw Error(ErrorCode::kBundleInvalid, "graph uses operator domain '" + n.domain + "'");
    }
    if (!supports_op(n.op_type)) {
      throw Error(ErrorCode::kBundleInvalid, "graph uses unsupported operator " + n.op_type);
    }
    for (const auto& in : n.inputs) {
      if (!in.empty()) last_use[in] = k;
    }
  }
  for (const auto& out : graph_.outputs) last_use.erase(out.name);
  release_after_.resize(graph_.nodes.size());
  for (const auto& [name, k] : last_use) {
    if (!graph_.initializers.count(name)) release_after_[k].push_back(name);
  }
}

std::vector<Tensor> Session::run(const std::map<std::string, Tensor>& feeds) const {
  std::unordered_map<std::string, Tensor> values;
  for (const auto& in : graph_.inputs) {
    auto it = feeds.find(in.name);
    if (it == feeds.end()) throw Error(ErrorCode::kBackendFailure, "missing graph input '" + in.name + "'");
    values[in.name] = it->second;
  }
  auto lookup = [&](const std::string& name) -> const Tensor* {
    if (auto it = values.find(name); it != values.end()) return &it->second;
    if (auto it = graph_.initializers.find(name); it != graph_.initializers.end()) return &it->second;
    return nullptr;
  };
  for (std::size_t k = 0; k < graph_.nodes.size(); ++k) {
    const Node& n = graph_.nodes[k];
    Inputs inputs;
    for (const auto& name : n.inputs) {
      if (name.empty()) {
        inputs.push_back(nullptr);
        continue;
      }
      const Tensor* t = lookup(name);
      if (!t) {
        throw Error(ErrorCode::kBackendFailure,
                    "node '" + n.name + "' (" + n.op_type + ") reads undefined value '" + name + "'");
      }
      inputs.push_back(t);
    }
    Outputs results;
    try {
      results = registry().at(n.op_type)(Context{n, inputs, graph_.opset});
    } catch (const Error& e) {
      throw Error(ErrorCode::kBackendFailure,
                  "node '" + n.name + "' (" + n.op_type + "): " + e.detail());
    }
    for (std::size_t o = 0; o < n.outputs.size(); ++o) {
      if (n.outputs[o].empty()) continue;
      if (o >= results.size()) {
        throw Error(ErrorCode::kBackendFailure,
                    "node '" + n.name + "' (" + n.op_type + ") has no output " + std::to_string(o));
      }
      values[n.outputs[o]] = std::move(results[o]);
    }
    for (const auto& name : release_after_[k]) values.erase(name);
  }
  std::vector<Tensor> out;
  for (const auto& o : graph_.outputs) {
    const Tensor* t = lookup(o.name);
    if (!t) throw Error(ErrorCode::kBackendFailure, "graph output '" + o.name + "' was not produced");
    out.push_back(*t);
  }
  return out;
}

}  // namespace pathex::onnx
