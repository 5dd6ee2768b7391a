#include "binpack/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "binpack/errors.hpp"

namespace binpack {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "BINPACK-CKPT";
constexpr int kVersion = 1;

static_assert(sizeof(double) == 8, "payload assumes 64-bit doubles");

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  // Little-endian on every supported target; raw copy is the format.
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

const CheckpointSection* Checkpoint::find(const std::string& name) const {
  for (const CheckpointSection& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  json manifest;
  manifest["format"] = kMagic;
  manifest["version"] = kVersion;
  manifest["meta"] = json::parse(ckpt.meta_json);
  json sections = json::array();
  for (const CheckpointSection& s : ckpt.sections) {
    json shapes = json::array();
    for (const TensorND& t : s.tensors) shapes.push_back(t.shape());
    sections.push_back({{"name", s.name}, {"shapes", std::move(shapes)}});
  }
  manifest["sections"] = std::move(sections);
  out << kMagic << '\n' << manifest.dump() << '\n';
  for (const CheckpointSection& s : ckpt.sections) {
    for (const TensorND& t : s.tensors) write_doubles(out, t.values());
  }
  if (!out) throw IoFailure("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpoint("no checkpoint at " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open: " + path);
  std::string magic, manifest_line;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw FormatVersionMismatch("bad checkpoint magic in " + path);
  }
  if (!std::getline(in, manifest_line)) {
    throw FormatVersionMismatch("missing checkpoint manifest in " + path);
  }
  json manifest = json::parse(manifest_line, nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != kMagic) {
    throw FormatVersionMismatch("bad checkpoint manifest in " + path);
  }
  if (manifest.value("version", -1) != kVersion) {
    throw FormatVersionMismatch("unsupported checkpoint version in " + path);
  }
  Checkpoint ckpt;
  ckpt.meta_json = manifest.at("meta").dump();
  for (const json& sec : manifest.at("sections")) {
    CheckpointSection s;
    s.name = sec.at("name").get<std::string>();
    for (const json& shape : sec.at("shapes")) {
      s.tensors.emplace_back(shape.get<std::vector<int>>());
    }
    ckpt.sections.push_back(std::move(s));
  }
  for (CheckpointSection& s : ckpt.sections) {
    for (TensorND& t : s.tensors) {
      in.read(reinterpret_cast<char*>(t.values().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
      if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(double))) {
        throw IoFailure("truncated checkpoint payload in " + path);
      }
    }
  }
  return ckpt;
}

CheckpointSection snapshot_section(const std::string& name,
                                   const std::vector<TensorND*>& params) {
  CheckpointSection s;
  s.name = name;
  s.tensors.reserve(params.size());
  for (const TensorND* p : params) s.tensors.push_back(*p);
  return s;
}

void restore_section(const CheckpointSection& section,
                     const std::vector<TensorND*>& params) {
  if (section.tensors.size() != params.size()) {
    throw ShapeMismatch("checkpoint section '" + section.name + "': tensor count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (section.tensors[i].shape() != params[i]->shape()) {
      throw ShapeMismatch("checkpoint section '" + section.name + "': tensor shape");
    }
    *params[i] = section.tensors[i];
  }
}

}  // namespace binpack
