// Copyright 2026 The yahtzee-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "features.hpp"

namespace yahtzee {

namespace {

constexpr char kMagic[8] = {'Y', 'Z', 'C', 'K', 'P', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
uint64_t get_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string get_string(std::istream& in) {
  const uint64_t len = get_u64(in);
  if (!in || len > (1ull << 30))
    throw CheckpointError("corrupt string length in checkpoint");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

template <typename T>
constexpr uint8_t dtype_tag() {
  return sizeof(T) == 4 ? 4 : 8;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const Checkpoint<T>& ckpt) {
  std::ofstream out(path + ".tmp", std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  const uint8_t dtype = dtype_tag<T>();
  out.write(reinterpret_cast<const char*>(&dtype), 1);
  put_u64(out, static_cast<uint64_t>(ckpt.games_played));
  put_u64(out, static_cast<uint64_t>(ckpt.updates));
  put_u64(out, static_cast<uint64_t>(ckpt.adam.step));
  put_string(out, ckpt.config.echo_text());

  put_u32(out, static_cast<uint32_t>(ckpt.params.views.size()));
  for (const TensorView& v : ckpt.params.views) {
    put_string(out, v.name);
    put_u32(out, static_cast<uint32_t>(v.rows));
    put_u32(out, static_cast<uint32_t>(v.cols));
  }
  auto put_arena = [&out](const std::vector<T>& a) {
    put_u64(out, a.size());
    out.write(reinterpret_cast<const char*>(a.data()),
              static_cast<std::streamsize>(a.size() * sizeof(T)));
  };
  put_arena(ckpt.params.data);
  put_arena(ckpt.adam.m);
  put_arena(ckpt.adam.v);
  put_arena(ckpt.kl_snapshot);
  if (!out) throw CheckpointError("short write of checkpoint: " + path);
  out.close();
  if (std::rename((path + ".tmp").c_str(), path.c_str()) != 0)
    throw CheckpointError("cannot move checkpoint into place: " + path);
}

RunConfig peek_checkpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw CheckpointError("checkpoint has wrong magic: " + path);
  const uint32_t version = get_u32(in);
  if (version != kVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " != expected " + std::to_string(kVersion));
  char dtype = 0;
  in.read(&dtype, 1);
  (void)get_u64(in);
  (void)get_u64(in);
  (void)get_u64(in);
  const std::string config_text = get_string(in);
  if (!in) throw CheckpointError("checkpoint truncated: " + path);
  return RunConfig::from_map(parse_config_text(config_text));
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw CheckpointError("checkpoint has wrong magic: " + path);
  const uint32_t version = get_u32(in);
  if (version != kVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " != expected " + std::to_string(kVersion));
  char dtype = 0;
  in.read(&dtype, 1);
  if (static_cast<uint8_t>(dtype) != dtype_tag<T>())
    throw CheckpointError("checkpoint precision mismatch");

  Checkpoint<T> ckpt;
  ckpt.games_played = static_cast<int64_t>(get_u64(in));
  ckpt.updates = static_cast<int64_t>(get_u64(in));
  const int64_t adam_step = static_cast<int64_t>(get_u64(in));
  ckpt.config = RunConfig::from_map(parse_config_text(get_string(in)));

  ckpt.params = Params<T>::build(ckpt.config.net,
                                 feature_length(ckpt.config.features));
  const uint32_t n_views = get_u32(in);
  if (n_views != ckpt.params.views.size())
    throw CheckpointError("checkpoint tensor count mismatch");
  for (const TensorView& v : ckpt.params.views) {
    const std::string name = get_string(in);
    const uint32_t rows = get_u32(in);
    const uint32_t cols = get_u32(in);
    if (name != v.name || rows != static_cast<uint32_t>(v.rows) ||
        cols != static_cast<uint32_t>(v.cols))
      throw CheckpointError("checkpoint tensor '" + name +
                            "' does not match the configured network");
  }
  auto get_arena = [&in, &path](std::vector<T>* a, size_t expected) {
    const uint64_t n = get_u64(in);
    if (n != expected)
      throw CheckpointError("checkpoint arena size mismatch in " + path);
    a->resize(n);
    in.read(reinterpret_cast<char*>(a->data()),
            static_cast<std::streamsize>(n * sizeof(T)));
  };
  const size_t count = ckpt.params.param_count();
  get_arena(&ckpt.params.data, count);
  ckpt.adam = AdamState<T>::zeros(count);
  get_arena(&ckpt.adam.m, count);
  get_arena(&ckpt.adam.v, count);
  get_arena(&ckpt.kl_snapshot, count);
  ckpt.adam.step = adam_step;
  if (!in) throw CheckpointError("checkpoint truncated: " + path);
  ckpt.params.sync_derived();
  return ckpt;
}

template void save_checkpoint<float>(const std::string&,
                                     const Checkpoint<float>&);
template void save_checkpoint<double>(const std::string&,
                                      const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::string&);
template Checkpoint<double> load_checkpoint<double>(const std::string&);

}  // namespace yahtzee
