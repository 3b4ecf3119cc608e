#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

// A small interpreter for inference graphs in the ONNX exchange format. It
// covers the operator subset that transformer encoder exports use
// (embeddings, attention, layer norm, GELU, shape arithmetic) in float32
// and int64 on the CPU.
namespace pathex::onnx {

// ONNX TensorProto.DataType values.
enum class ElemType : int {
  kFloat = 1,
  kUint8 = 2,
  kInt8 = 3,
  kUint16 = 4,
  kInt16 = 5,
  kInt32 = 6,
  kInt64 = 7,
  kString = 8,
  kBool = 9,
  kFloat16 = 10,
  kDouble = 11,
  kUint32 = 12,
  kUint64 = 13,
};

bool is_floating(ElemType t);

// Floating types are held as float32 in `f`, everything else as int64 in `i`.
struct Tensor {
  ElemType type = ElemType::kFloat;
  std::vector<std::int64_t> shape;
  std::vector<float> f;
  std::vector<std::int64_t> i;

  std::size_t numel() const;
  bool floating() const { return is_floating(type); }

  static Tensor floats(std::vector<std::int64_t> shape, std::vector<float> data);
  static Tensor ints(std::vector<std::int64_t> shape, std::vector<std::int64_t> data,
                     ElemType type = ElemType::kInt64);
};

struct Attribute {
  enum class Kind { kFloat, kInt, kString, kTensor, kFloats, kInts, kStrings, kOther };
  Kind kind = Kind::kOther;
  float f = 0.0f;
  std::int64_t i = 0;
  std::string s;
  Tensor t;
  std::vector<float> floats;
  std::vector<std::int64_t> ints;
  std::vector<std::string> strings;
};

struct Node {
  std::string name;
  std::string op_type;
  std::string domain;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, Attribute> attributes;
};

struct ValueInfo {
  std::string name;
  ElemType type = ElemType::kFloat;
  // -1 for symbolic or unknown dimensions.
  std::vector<std::int64_t> shape;
};

struct Graph {
  std::vector<Node> nodes;
  std::map<std::string, Tensor> initializers;
  std::vector<ValueInfo> inputs;  // runtime inputs only (initializers removed)
  std::vector<ValueInfo> outputs;
  std::int64_t opset = 0;  // default-domain opset version
};

// Parses a serialized ModelProto. Initializers stored as external data are
// read from files next to the model. Errors: BUNDLE_INVALID for malformed or
// unsupported content.
Graph parse_model(std::string_view bytes, const std::filesystem::path& base_dir = {});
Graph load_model(const std::filesystem::path& path);

// Executes a graph. Nodes must be in topological order, as the format
// requires. Unsupported operators are rejected when the session is built.
class Session {
 public:
  explicit Session(Graph graph);

  const std::vector<ValueInfo>& inputs() const { return graph_.inputs; }
  const std::vector<ValueInfo>& outputs() const { return graph_.outputs; }

  // Returns the graph outputs in declaration order. BACKEND_FAILURE for
  // missing feeds or shape errors during execution.
  std::vector<Tensor> run(const std::map<std::string, Tensor>& feeds) const;

 private:
  Graph graph_;
  // For each node, the values whose last use it is.
  std::vector<std::vector<std::string>> release_after_;
};

bool supports_op(std::string_view op_type);

}  // namespace pathex::onnx
