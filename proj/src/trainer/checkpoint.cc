// Copyright (c) 2026 The SVS Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svs/trainer/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace svs::trainer {

namespace {

constexpr char kMagic[8] = {'S', 'V', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put<uint64_t>(out, s.size());
  out.append(s);
}

void put_arrays(std::string& out, const std::map<std::string, Matrix>& arrays) {
  put<uint64_t>(out, arrays.size());
  for (const auto& [name, m] : arrays) {
    put_string(out, name);
    put<int64_t>(out, m.rows());
    put<int64_t>(out, m.cols());
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<size_t>(m.size()) * sizeof(Real));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string() {
    const uint64_t n = get<uint64_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::map<std::string, Matrix> get_arrays() {
    std::map<std::string, Matrix> out;
    const uint64_t count = get<uint64_t>();
    for (uint64_t i = 0; i < count; ++i) {
      std::string name = get_string();
      const int64_t rows = get<int64_t>();
      const int64_t cols = get<int64_t>();
      require(rows >= 0 && cols >= 0, "checkpoint: negative shape for " + name);
      Matrix m(rows, cols);
      const size_t n = static_cast<size_t>(rows * cols) * sizeof(Real);
      need(n);
      std::memcpy(m.data(), bytes_.data() + pos_, n);
      pos_ += n;
      out.emplace(std::move(name), std::move(m));
    }
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    require(pos_ + n <= bytes_.size(), "checkpoint: truncated file");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::set<std::string> Checkpoint::groups() const {
  std::set<std::string> out;
  for (const auto& [name, m] : params) out.insert(nn::ParameterStore::group_of(name));
  return out;
}

Checkpoint make_checkpoint(const nn::ParameterStore& store, score::Stage stage,
                           long step, const std::string& config_json,
                           const std::set<std::string>& excluded_groups) {
  Checkpoint c;
  c.stage = stage;
  c.step = step;
  c.config_json = config_json;
  for (const auto& [name, t] : store.all())
    if (!excluded_groups.count(nn::ParameterStore::group_of(name)))
      c.params.emplace(name, t.value());
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put<uint32_t>(out, ckpt.stage == score::Stage::kPretrain ? 0u : 1u);
  put<int64_t>(out, ckpt.step);
  put_string(out, ckpt.config_json);
  put_arrays(out, ckpt.params);
  put_arrays(out, ckpt.arrays);
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof(kMagic) &&
              std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0,
          "checkpoint: bad magic");
  Reader r(std::string_view(bytes).substr(sizeof(kMagic)));
  Checkpoint c;
  const uint32_t stage = r.get<uint32_t>();
  require(stage <= 1, "checkpoint: unknown stage tag");
  c.stage = stage == 0 ? score::Stage::kPretrain : score::Stage::kFinetune;
  c.step = r.get<int64_t>();
  c.config_json = r.get_string();
  c.params = r.get_arrays();
  c.arrays = r.get_arrays();
  require(r.done(), "checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot write checkpoint: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), "cannot write checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

TransferReport load_pretrained(const Checkpoint& ckpt, nn::ParameterStore& store) {
  require(ckpt.stage == score::Stage::kPretrain,
          "load_pretrained: checkpoint stage is finetune, expected pretrain");
  for (const auto& [name, t] : store.all()) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) continue;
    require(it->second.rows() == t.rows() && it->second.cols() == t.cols(),
            "load_pretrained: shape conflict on parameter " + name + " (checkpoint " +
                std::to_string(it->second.rows()) + "x" +
                std::to_string(it->second.cols()) + ", model " +
                std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")");
  }
  TransferReport report;
  std::set<std::string> present_groups;
  for (const auto& [name, t] : store.all()) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) {
      report.freshly_initialized.insert(nn::ParameterStore::group_of(name));
      continue;
    }
    present_groups.insert(nn::ParameterStore::group_of(name));
    nn::Tensor target = t;
    target.mutable_value() = it->second;
    report.transferred.push_back(name);
  }
  for (const auto& [name, m] : ckpt.params)
    if (!store.contains(name)) report.ignored.push_back(name);
  // A group counts as fresh only when none of it came from the checkpoint.
  for (const auto& g : present_groups) report.freshly_initialized.erase(g);
  return report;
}

void restore_parameters(const Checkpoint& ckpt, nn::ParameterStore& store,
                        const std::set<std::string>& optional_groups) {
  for (const auto& [name, t] : store.all()) {
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) {
      require(optional_groups.count(nn::ParameterStore::group_of(name)) > 0,
              "checkpoint: missing parameter " + name);
      continue;
    }
    require(it->second.rows() == t.rows() && it->second.cols() == t.cols(),
            "checkpoint: shape conflict on parameter " + name);
    nn::Tensor target = t;
    target.mutable_value() = it->second;
  }
}

}  // namespace svs::trainer
