// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#include "infomin/checkpoint.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "infomin/errors.hpp"

namespace infomin {

namespace {

constexpr const char* kMagic = "infomin-checkpoint";
constexpr int kVersion = 1;

std::string hex(double x) {
  std::ostringstream os;
  os << std::hexfloat << x;
  return os.str();
}

double parse_double(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw InputError("checkpoint line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& s, std::size_t line) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw InputError("checkpoint line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
}

const char* activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint, const ConfigEcho& config) {
  const auto& p = checkpoint.params;
  p.validate();
  std::ostringstream os;
  os << kMagic << ' ' << kVersion << '\n';
  os << "step " << checkpoint.step << '\n';
  os << "dev_score " << hex(checkpoint.dev_score) << '\n';
  os << "encoder.vocab_size " << p.config.vocab_size << '\n';
  os << "encoder.embed_dim " << p.config.embed_dim << '\n';
  os << "encoder.hidden_dim " << p.config.hidden_dim << '\n';
  os << "encoder.hidden_layers " << p.config.hidden_layers << '\n';
  os << "encoder.output_dim " << p.config.output_dim << '\n';
  os << "encoder.dropout " << hex(p.config.dropout) << '\n';
  os << "encoder.activation " << activation_name(p.config.activation) << '\n';
  for (const auto& [key, value] : config) {
    if (key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw InputError("checkpoint config echo entry '" + key + "' contains whitespace or newlines");
    }
    os << "config " << key << ' ' << value << '\n';
  }
  const auto names = EncoderParams::tensor_names(p.config);
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    const auto& t = p.tensors[i];
    os << "tensor " << names[i] << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const auto row = t.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? " " : "") << hex(row[c]);
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

LoadedCheckpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto fields = [&]() {
    std::istringstream ls(line);
    std::vector<std::string> out;
    for (std::string f; ls >> f;) out.push_back(f);
    return out;
  };

  if (!next()) throw InputError("checkpoint is empty");
  {
    const auto f = fields();
    if (f.size() != 2 || f[0] != kMagic) throw InputError("not an infomin checkpoint");
    if (parse_size(f[1], lineno) != static_cast<std::size_t>(kVersion)) {
      throw InputError("unsupported checkpoint version " + f[1]);
    }
  }

  LoadedCheckpoint out;
  EncoderConfig enc;
  bool saw_end = false;
  std::vector<Tensor> tensors;
  while (next()) {
    const auto f = fields();
    if (f.empty()) continue;
    const auto& key = f[0];
    if (key == "end") {
      saw_end = true;
      break;
    }
    if (key == "config") {
      if (f.size() < 2) throw InputError("checkpoint line " + std::to_string(lineno) + ": empty config entry");
      const auto pos = std::string("config ").size() + f[1].size() + 1;
      std::string value = pos < line.size() ? line.substr(pos) : "";
      out.config.emplace_back(f[1], value);
      continue;
    }
    if (key == "tensor") {
      if (f.size() != 4) throw InputError("checkpoint line " + std::to_string(lineno) + ": malformed tensor header");
      const auto rows = parse_size(f[2], lineno), cols = parse_size(f[3], lineno);
      std::vector<double> data;
      data.reserve(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!next()) throw InputError("checkpoint truncated inside tensor " + f[1]);
        const auto values = fields();
        if (values.size() != cols) {
          throw InputError("checkpoint line " + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                           " values, got " + std::to_string(values.size()));
        }
        for (const auto& v : values) data.push_back(parse_double(v, lineno));
      }
      tensors.emplace_back(Shape{rows, cols}, std::move(data));
      continue;
    }
    if (f.size() != 2) throw InputError("checkpoint line " + std::to_string(lineno) + ": expected 'key value'");
    const auto& value = f[1];
    if (key == "step") out.checkpoint.step = parse_size(value, lineno);
    else if (key == "dev_score") out.checkpoint.dev_score = parse_double(value, lineno);
    else if (key == "encoder.vocab_size") enc.vocab_size = parse_size(value, lineno);
    else if (key == "encoder.embed_dim") enc.embed_dim = parse_size(value, lineno);
    else if (key == "encoder.hidden_dim") enc.hidden_dim = parse_size(value, lineno);
    else if (key == "encoder.hidden_layers") enc.hidden_layers = parse_size(value, lineno);
    else if (key == "encoder.output_dim") enc.output_dim = parse_size(value, lineno);
    else if (key == "encoder.dropout") enc.dropout = parse_double(value, lineno);
    else if (key == "encoder.activation") {
      if (value == "tanh") enc.activation = Activation::kTanh;
      else if (value == "identity") enc.activation = Activation::kIdentity;
      else throw InputError("checkpoint: unknown activation '" + value + "'");
    } else {
      throw InputError("checkpoint line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!saw_end) throw InputError("checkpoint truncated: missing 'end'");
  out.checkpoint.params = EncoderParams{enc, std::move(tensors)};
  out.checkpoint.params.validate();
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, const ConfigEcho& config) {
  const auto text = serialize_checkpoint(checkpoint, config);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace infomin
