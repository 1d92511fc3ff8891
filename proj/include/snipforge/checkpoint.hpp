// Checkpoint container: magic "SNF1", a JSON manifest of named tensors,
// then raw little-endian float32 payloads. Tensors are written sorted by
// name so equal contents always produce byte-identical files.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "snipforge/tensor.hpp"

namespace snipforge::numkit {

constexpr char kCheckpointMagic[4] = {'S', 'N', 'F', '1'};
constexpr int kCheckpointVersion = 1;

using TensorMap = std::map<std::string, Tensor>;

inline void save_checkpoint(const std::string& path, const TensorMap& tensors) {
  nlohmann::json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["tensors"] = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = t.shape;
    entry["dtype"] = "f32";
    entry["offset"] = offset;
    manifest["tensors"].push_back(entry);
    offset += t.size() * sizeof(float);
  }
  std::string mstr = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  uint64_t mlen = mstr.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((mlen >> (8 * i)) & 0xff);
  out.write(lenbuf, 8);
  out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
  for (const auto& [name, t] : tensors) {
    std::vector<float> buf(t.size());
    for (size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<float>(t.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

inline TensorMap load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not an SNF1 checkpoint: " + path);
  char lenbuf[8];
  in.read(lenbuf, 8);
  uint64_t mlen = 0;
  for (int i = 0; i < 8; ++i) mlen |= static_cast<uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
  std::string mstr(mlen, '\0');
  in.read(mstr.data(), static_cast<std::streamsize>(mlen));
  if (!in) throw std::runtime_error("truncated checkpoint manifest: " + path);
  nlohmann::json manifest = nlohmann::json::parse(mstr);
  if (manifest.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);

  std::streampos payload_start = in.tellg();
  TensorMap out;
  for (const auto& entry : manifest.at("tensors")) {
    std::string name = entry.at("name").get<std::string>();
    std::vector<size_t> shape = entry.at("shape").get<std::vector<size_t>>();
    if (entry.at("dtype").get<std::string>() != "f32")
      throw std::runtime_error("unsupported dtype for tensor " + name + " in " + path);
    uint64_t off = entry.at("offset").get<uint64_t>();
    Tensor t(shape);
    std::vector<float> buf(t.size());
    in.seekg(payload_start + static_cast<std::streamoff>(off));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated tensor payload for " + name + " in " + path);
    for (size_t i = 0; i < t.size(); ++i) t.data[i] = static_cast<double>(buf[i]);
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace snipforge::numkit
