// Protobuf wire-format reader for the ModelProto fields inference needs.

#include <cstring>
#include <fstream>
#include <set>

#include "pathex/qa/onnx.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"

namespace pathex::onnx {
namespace {

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::kBundleInvalid, "graph: " + why);
}

enum WireType : int { kVarint = 0, kFixed64 = 1, kLen = 2, kFixed32 = 5 };

class Reader {
 public:
  explicit Reader(std::string_view bytes) : p_(bytes.data()), end_(bytes.data() + bytes.size()) {}

  bool done() const { return p_ >= end_; }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (p_ >= end_) malformed("truncated varint");
      const auto b = static_cast<unsigned char>(*p_++);
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    malformed("varint too long");
  }

  // Returns (field number, wire type).
  std::pair<std::uint32_t, int> tag() {
    const auto t = varint();
    return {static_cast<std::uint32_t>(t >> 3), static_cast<int>(t & 7)};
  }

  std::string_view bytes() {
    const auto n = varint();
    if (n > static_cast<std::uint64_t>(end_ - p_)) malformed("truncated field");
    std::string_view out(p_, n);
    p_ += n;
    return out;
  }

  std::uint32_t fixed32() {
    if (end_ - p_ < 4) malformed("truncated fixed32");
    std::uint32_t v;
    std::memcpy(&v, p_, 4);
    p_ += 4;
    return v;
  }

  std::uint64_t fixed64() {
    if (end_ - p_ < 8) malformed("truncated fixed64");
    std::uint64_t v;
    std::memcpy(&v, p_, 8);
    p_ += 8;
    return v;
  }

  void skip(int wire) {
    switch (wire) {
      case kVarint: varint(); break;
      case kFixed64: fixed64(); break;
      case kLen: bytes(); break;
      case kFixed32: fixed32(); break;
      default: malformed("unsupported wire type " + std::to_string(wire));
    }
  }

 private:
  const char* p_;
  const char* end_;
};

float as_float(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

double as_double(std::uint64_t bits) {
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

// Repeated int64 fields arrive packed or one per tag.
void read_ints(Reader& r, int wire, std::vector<std::int64_t>& out) {
  if (wire == kLen) {
    Reader packed(r.bytes());
    while (!packed.done()) out.push_back(static_cast<std::int64_t>(packed.varint()));
  } else {
    out.push_back(static_cast<std::int64_t>(r.varint()));
  }
}

void read_floats(Reader& r, int wire, std::vector<float>& out) {
  if (wire == kLen) {
    Reader packed(r.bytes());
    while (!packed.done()) out.push_back(as_float(packed.fixed32()));
  } else {
    out.push_back(as_float(r.fixed32()));
  }
}

void read_doubles(Reader& r, int wire, std::vector<float>& out) {
  if (wire == kLen) {
    Reader packed(r.bytes());
    while (!packed.done()) out.push_back(static_cast<float>(as_double(packed.fixed64())));
  } else {
    out.push_back(static_cast<float>(as_double(r.fixed64())));
  }
}

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = (h & 0x8000u) << 16;
  std::uint32_t exp = (h >> 10) & 0x1f;
  std::uint32_t mant = h & 0x3ffu;
  std::uint32_t bits;
  if (exp == 0) {
    if (mant == 0) {
      bits = sign;
    } else {
      exp = 127 - 15 + 1;
      while (!(mant & 0x400u)) {
        mant <<= 1;
        --exp;
      }
      mant &= 0x3ffu;
      bits = sign | (exp << 23) | (mant << 13);
    }
  } else if (exp == 31) {
    bits = sign | 0x7f800000u | (mant << 13);
  } else {
    bits = sign | ((exp + 127 - 15) << 23) | (mant << 13);
  }
  return as_float(bits);
}

std::size_t elem_size(ElemType t) {
  switch (t) {
    case ElemType::kFloat: case ElemType::kInt32: case ElemType::kUint32: return 4;
    case ElemType::kUint8: case ElemType::kInt8: case ElemType::kBool: return 1;
    case ElemType::kUint16: case ElemType::kInt16: case ElemType::kFloat16: return 2;
    case ElemType::kInt64: case ElemType::kUint64: case ElemType::kDouble: return 8;
    case ElemType::kString: break;
  }
  malformed("unsupported tensor element type " + std::to_string(static_cast<int>(t)));
}

void decode_raw(Tensor& t, std::string_view raw) {
  const std::size_t n = t.numel();
  const std::size_t width = elem_size(t.type);
  if (raw.size() != n * width) {
    malformed("raw data size " + std::to_string(raw.size()) + " does not match shape");
  }
  const char* p = raw.data();
  auto load = [p](auto& dst, std::size_t k) {
    std::memcpy(&dst, p + k * sizeof(dst), sizeof(dst));
  };
  if (t.floating()) {
    t.f.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (t.type == ElemType::kFloat) {
        float v; load(v, k); t.f[k] = v;
      } else if (t.type == ElemType::kDouble) {
        double v; load(v, k); t.f[k] = static_cast<float>(v);
      } else {
        std::uint16_t v; load(v, k); t.f[k] = half_to_float(v);
      }
    }
    return;
  }
  t.i.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    switch (t.type) {
      case ElemType::kInt64: { std::int64_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kUint64: { std::uint64_t v; load(v, k); t.i[k] = static_cast<std::int64_t>(v); break; }
      case ElemType::kInt32: { std::int32_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kUint32: { std::uint32_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kInt16: { std::int16_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kUint16: { std::uint16_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kInt8: { std::int8_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kUint8: { std::uint8_t v; load(v, k); t.i[k] = v; break; }
      case ElemType::kBool: { std::uint8_t v; load(v, k); t.i[k] = v ? 1 : 0; break; }
      default: malformed("unsupported integer element type");
    }
  }
}

struct TensorParse {
  Tensor tensor;
  std::string name;
  std::string raw;
  bool has_raw = false;
  bool external = false;
  std::map<std::string, std::string> external_data;
};

TensorParse parse_tensor(std::string_view bytes) {
  TensorParse out;
  Tensor& t = out.tensor;
  std::vector<std::int64_t> int_data;
  std::vector<float> float_data;
  bool has_type = false;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    switch (field) {
      case 1: read_ints(r, wire, t.shape); break;
      case 2:
        t.type = static_cast<ElemType>(r.varint());
        has_type = true;
        break;
      case 4: read_floats(r, wire, float_data); break;
      case 5:  // int32_data, also carries float16 bits
      case 7:
      case 11: read_ints(r, wire, int_data); break;
      case 8: out.name = std::string(r.bytes()); break;
      case 9:
        out.raw = std::string(r.bytes());
        out.has_raw = true;
        break;
      case 10: read_doubles(r, wire, float_data); break;
      case 13: {
        Reader e(r.bytes());
        std::string key, value;
        while (!e.done()) {
          const auto [f2, w2] = e.tag();
          if (f2 == 1) key = std::string(e.bytes());
          else if (f2 == 2) value = std::string(e.bytes());
          else e.skip(w2);
        }
        out.external_data[key] = value;
        break;
      }
      case 14: out.external = r.varint() == 1; break;
      default: r.skip(wire);
    }
  }
  if (!has_type) malformed("tensor '" + out.name + "' has no data type");
  for (auto d : t.shape) {
    if (d < 0) malformed("tensor '" + out.name + "' has a negative dimension");
  }
  if (t.type == ElemType::kString) malformed("string tensors are not supported");
  elem_size(t.type);
  if (out.has_raw || out.external) return out;

  const std::size_t n = t.numel();
  if (t.floating()) {
    if (t.type == ElemType::kFloat16) {
      for (auto bits : int_data) t.f.push_back(half_to_float(static_cast<std::uint16_t>(bits)));
    } else {
      t.f = std::move(float_data);
    }
    if (t.f.size() != n) malformed("tensor '" + out.name + "' data does not match its shape");
  } else {
    t.i = std::move(int_data);
    if (t.type == ElemType::kBool) {
      for (auto& v : t.i) v = v ? 1 : 0;
    }
    if (t.i.size() != n) malformed("tensor '" + out.name + "' data does not match its shape");
  }
  return out;
}

void finish_tensor(TensorParse& tp, const std::filesystem::path& base_dir) {
  if (tp.external) {
    const auto loc = tp.external_data.find("location");
    if (loc == tp.external_data.end()) malformed("external tensor '" + tp.name + "' has no location");
    const std::filesystem::path rel(loc->second);
    if (rel.is_absolute() || rel.lexically_normal().string().rfind("..", 0) == 0) {
      malformed("external data must stay next to the graph: " + loc->second);
    }
    std::ifstream in(base_dir / rel, std::ios::binary);
    if (!in) malformed("cannot open external data " + (base_dir / rel).string());
    std::size_t offset = 0;
    std::size_t length = tp.tensor.numel() * elem_size(tp.tensor.type);
    if (auto it = tp.external_data.find("offset"); it != tp.external_data.end()) {
      offset = std::stoull(it->second);
    }
    if (auto it = tp.external_data.find("length"); it != tp.external_data.end()) {
      length = std::stoull(it->second);
    }
    tp.raw.assign(length, '\0');
    in.seekg(static_cast<std::streamoff>(offset));
    if (!in.read(tp.raw.data(), static_cast<std::streamsize>(length))) {
      malformed("external data for '" + tp.name + "' is truncated");
    }
    tp.has_raw = true;
  }
  if (tp.has_raw) {
    decode_raw(tp.tensor, tp.raw);
    tp.raw.clear();
  }
}

ValueInfo parse_value_info(std::string_view bytes) {
  ValueInfo v;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    if (field == 1) {
      v.name = std::string(r.bytes());
    } else if (field == 2) {
      Reader type(r.bytes());
      while (!type.done()) {
        const auto [tf, tw] = type.tag();
        if (tf != 1) {
          type.skip(tw);
          continue;
        }
        Reader tensor(type.bytes());
        while (!tensor.done()) {
          const auto [f, w] = tensor.tag();
          if (f == 1) {
            v.type = static_cast<ElemType>(tensor.varint());
          } else if (f == 2) {
            Reader shape(tensor.bytes());
            while (!shape.done()) {
              const auto [sf, sw] = shape.tag();
              if (sf != 1) {
                shape.skip(sw);
                continue;
              }
              Reader dim(shape.bytes());
              std::int64_t value = -1;
              while (!dim.done()) {
                const auto [df, dw] = dim.tag();
                if (df == 1) value = static_cast<std::int64_t>(dim.varint());
                else dim.skip(dw);
              }
              v.shape.push_back(value);
            }
          } else {
            tensor.skip(w);
          }
        }
      }
    } else {
      r.skip(wire);
    }
  }
  return v;
}

Attribute parse_attribute(std::string_view bytes, std::string& name,
                          const std::filesystem::path& base_dir) {
  Attribute a;
  int declared = 0;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    switch (field) {
      case 1: name = std::string(r.bytes()); break;
      case 2: a.f = as_float(r.fixed32()); break;
      case 3: a.i = static_cast<std::int64_t>(r.varint()); break;
      case 4: a.s = std::string(r.bytes()); break;
      case 5: {
        auto tp = parse_tensor(r.bytes());
        finish_tensor(tp, base_dir);
        a.t = std::move(tp.tensor);
        break;
      }
      case 7: read_floats(r, wire, a.floats); break;
      case 8: read_ints(r, wire, a.ints); break;
      case 9: a.strings.emplace_back(r.bytes()); break;
      case 20: declared = static_cast<int>(r.varint()); break;
      default: r.skip(wire);
    }
  }
  // AttributeProto.AttributeType
  switch (declared) {
    case 1: a.kind = Attribute::Kind::kFloat; break;
    case 2: a.kind = Attribute::Kind::kInt; break;
    case 3: a.kind = Attribute::Kind::kString; break;
    case 4: a.kind = Attribute::Kind::kTensor; break;
    case 6: a.kind = Attribute::Kind::kFloats; break;
    case 7: a.kind = Attribute::Kind::kInts; break;
    case 8: a.kind = Attribute::Kind::kStrings; break;
    default: a.kind = Attribute::Kind::kOther;
  }
  return a;
}

Node parse_node(std::string_view bytes, const std::filesystem::path& base_dir) {
  Node n;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    switch (field) {
      case 1: n.inputs.emplace_back(r.bytes()); break;
      case 2: n.outputs.emplace_back(r.bytes()); break;
      case 3: n.name = std::string(r.bytes()); break;
      case 4: n.op_type = std::string(r.bytes()); break;
      case 5: {
        std::string name;
        auto a = parse_attribute(r.bytes(), name, base_dir);
        n.attributes[name] = std::move(a);
        break;
      }
      case 7: n.domain = std::string(r.bytes()); break;
      default: r.skip(wire);
    }
  }
  return n;
}

Graph parse_graph(std::string_view bytes, const std::filesystem::path& base_dir) {
  Graph g;
  std::vector<ValueInfo> declared_inputs;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    switch (field) {
      case 1: g.nodes.push_back(parse_node(r.bytes(), base_dir)); break;
      case 5: {
        auto tp = parse_tensor(r.bytes());
        finish_tensor(tp, base_dir);
        g.initializers[tp.name] = std::move(tp.tensor);
        break;
      }
      case 11: declared_inputs.push_back(parse_value_info(r.bytes())); break;
      case 12: g.outputs.push_back(parse_value_info(r.bytes())); break;
      case 15: malformed("sparse initializers are not supported");
      default: r.skip(wire);
    }
  }
  for (auto& v : declared_inputs) {
    if (!g.initializers.count(v.name)) g.inputs.push_back(std::move(v));
  }
  return g;
}

}  // namespace

Graph parse_model(std::string_view bytes, const std::filesystem::path& base_dir) {
  Graph g;
  std::int64_t opset = 0;
  bool has_graph = false;
  Reader r(bytes);
  while (!r.done()) {
    const auto [field, wire] = r.tag();
    if (field == 7) {
      g = parse_graph(r.bytes(), base_dir);
      has_graph = true;
    } else if (field == 8) {
      Reader op(r.bytes());
      std::string domain;
      std::int64_t version = 0;
      while (!op.done()) {
        const auto [f, w] = op.tag();
        if (f == 1) domain = std::string(op.bytes());
        else if (f == 2) version = static_cast<std::int64_t>(op.varint());
        else op.skip(w);
      }
      if (domain.empty() || domain == "ai.onnx") opset = version;
    } else {
      r.skip(wire);
    }
  }
  if (!has_graph) malformed("model has no graph");
  if (g.outputs.empty()) malformed("graph declares no outputs");
  g.opset = opset;
  return g;
}

Graph load_model(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBundleInvalid, e.what());
  }
  return parse_model(bytes, path.parent_path());
}

}  // namespace pathex::onnx
