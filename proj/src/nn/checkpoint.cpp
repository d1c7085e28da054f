#include "arena/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "arena/errors.hpp"
#include "arena/format.hpp"

namespace arena::nn {

namespace {

constexpr const char* kMagic = "arena-checkpoint";

class LineReader {
 public:
  LineReader(const std::string& text, std::string source) : in_(text), source_(std::move(source)) {}

  std::string next(const char* expecting) {
    std::string line;
    if (!std::getline(in_, line)) fail(std::string("unexpected end of file, expected ") + expecting);
    ++line_no_;
    return line;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istringstream in_;
  std::string source_;
  int line_no_ = 0;
};

std::pair<std::string, std::string> split_first(const std::string& line) {
  const auto pos = line.find(' ');
  if (pos == std::string::npos) return {line, ""};
  return {line.substr(0, pos), line.substr(pos + 1)};
}

}  // namespace

const Tensor2* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

std::string to_text(const Checkpoint& checkpoint) {
  std::ostringstream out;
  out << kMagic << ' ' << checkpoint.version << '\n';
  out << "fingerprint " << checkpoint.fingerprint << '\n';
  out << "meta " << checkpoint.meta.size() << '\n';
  for (const auto& [key, value] : checkpoint.meta) out << key << ' ' << value << '\n';
  out << "tensors " << checkpoint.tensors.size() << '\n';
  for (const auto& t : checkpoint.tensors) {
    out << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << '\n';
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(t.value.data()[i]);
    }
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

Checkpoint from_text(const std::string& text, const std::string& source) {
  LineReader reader(text, source);
  Checkpoint ckpt;
  try {
    auto [magic, version] = split_first(reader.next("header"));
    if (magic != kMagic) reader.fail("not a checkpoint file");
    ckpt.version = static_cast<int>(parse_int(version));
    if (ckpt.version != kCheckpointVersion) {
      reader.fail("unsupported checkpoint version " + version);
    }
    auto [fp_key, fp] = split_first(reader.next("fingerprint"));
    if (fp_key != "fingerprint") reader.fail("expected fingerprint line");
    ckpt.fingerprint = fp;

    auto [meta_key, meta_count] = split_first(reader.next("meta count"));
    if (meta_key != "meta") reader.fail("expected meta line");
    const long long n_meta = parse_int(meta_count);
    for (long long i = 0; i < n_meta; ++i) {
      auto [k, v] = split_first(reader.next("meta entry"));
      ckpt.meta[k] = v;
    }

    auto [tensors_key, tensor_count] = split_first(reader.next("tensor count"));
    if (tensors_key != "tensors") reader.fail("expected tensors line");
    const long long n_tensors = parse_int(tensor_count);
    for (long long i = 0; i < n_tensors; ++i) {
      std::istringstream head(reader.next("tensor header"));
      NamedTensor t;
      long long rows = -1, cols = -1;
      if (!(head >> t.name >> rows >> cols) || rows < 0 || cols < 0) {
        reader.fail("malformed tensor header");
      }
      t.value.resize(rows, cols);
      std::istringstream values(reader.next("tensor values"));
      std::string token;
      Eigen::Index j = 0;
      while (values >> token) {
        if (j >= t.value.size()) reader.fail("too many values for tensor " + t.name);
        t.value.data()[j++] = parse_double(token);
      }
      if (j != t.value.size()) reader.fail("too few values for tensor " + t.name);
      ckpt.tensors.push_back(std::move(t));
    }
    if (reader.next("end marker") != "end") reader.fail("expected end marker");
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << to_text(checkpoint);
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path.string());
}

}  // namespace arena::nn
