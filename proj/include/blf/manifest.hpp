#pragma once
// Run manifest: per stage, the config hash, seed and SHA-256 of every input
// and output file. A stage whose recorded hashes all still match is up to
// date and can be skipped.

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace blf {

inline std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

struct StageRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path relative to the run directory -> sha256
};

class Manifest {
 public:
  explicit Manifest(std::filesystem::path dir) : dir_(std::move(dir)) {
    const auto p = file();
    if (!std::filesystem::exists(p)) return;
    const auto j = nlohmann::json::parse(read_file(p), nullptr, false);
    if (j.is_discarded() || !j.contains("stages")) throw DataError("corrupt manifest: " + p.string());
    for (const auto& [name, s] : j["stages"].items()) {
      StageRecord r;
      r.config_hash = s.value("config_hash", "");
      r.seed = s.value("seed", std::uint64_t{0});
      r.inputs = s.value("inputs", std::map<std::string, std::string>{});
      r.outputs = s.value("outputs", std::map<std::string, std::string>{});
      stages_[name] = std::move(r);
    }
  }

  std::filesystem::path file() const { return dir_ / "manifest.json"; }
  const std::map<std::string, StageRecord>& stages() const { return stages_; }

  /// True when the stage ran with this config and seed, and every input and
  /// output still hashes to the recorded value.
  bool up_to_date(const std::string& stage, const std::string& config_hash, std::uint64_t seed,
                  const std::vector<std::string>& inputs) const {
    const auto it = stages_.find(stage);
    if (it == stages_.end()) return false;
    const auto& r = it->second;
    if (r.config_hash != config_hash || r.seed != seed || r.inputs.size() != inputs.size()) return false;
    for (const auto& in : inputs) {
      const auto h = r.inputs.find(in);
      if (h == r.inputs.end() || !std::filesystem::exists(in) || sha256_file(in) != h->second) return false;
    }
    for (const auto& [out, hash] : r.outputs)
      if (!std::filesystem::exists(dir_ / out) || sha256_file(dir_ / out) != hash) return false;
    return true;
  }

  void record(const std::string& stage, const std::string& config_hash, std::uint64_t seed,
              const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    StageRecord r;
    r.config_hash = config_hash;
    r.seed = seed;
    for (const auto& in : inputs) r.inputs[in] = sha256_file(in);
    for (const auto& out : outputs) r.outputs[out] = sha256_file(dir_ / out);
    stages_[stage] = std::move(r);
    save();
  }

  void save() const {
    nlohmann::json j;
    j["stages"] = nlohmann::json::object();
    for (const auto& [name, r] : stages_)
      j["stages"][name] = {{"config_hash", r.config_hash},
                           {"seed", r.seed},
                           {"inputs", r.inputs},
                           {"outputs", r.outputs}};
    std::ofstream out(file());
    if (!out) throw DataError("cannot write manifest " + file().string());
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, StageRecord> stages_;
};

}  // namespace blf
