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

#ifndef SVS_TRAINER_CHECKPOINT_H_
#define SVS_TRAINER_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "svs/nn/parameters.h"
#include "svs/score/corpus.h"

namespace svs::trainer {

// Groups that only exist once fine-tuning starts.
inline const std::set<std::string> kFinetuneOnlyGroups = {
    "duration_regulator", "pitch_predictor", "energy_predictor"};

struct Checkpoint {
  score::Stage stage = score::Stage::kPretrain;
  long step = 0;
  std::string config_json;
  std::map<std::string, Matrix> params;  // name -> array
  std::map<std::string, Matrix> arrays;  // non-trainable state

  std::set<std::string> groups() const;
};

// Snapshot of every parameter whose group is not excluded.
Checkpoint make_checkpoint(const nn::ParameterStore& store, score::Stage stage,
                           long step, const std::string& config_json,
                           const std::set<std::string>& excluded_groups = {});

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Written to a sibling temporary and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TransferReport {
  std::vector<std::string> transferred;       // parameter names
  std::set<std::string> freshly_initialized;  // groups absent from the source
  std::vector<std::string> ignored;           // source names with no target
};

// Copies every name shared by checkpoint and store. Shapes must agree.
TransferReport load_pretrained(const Checkpoint& ckpt, nn::ParameterStore& store);

// Overwrites the store from a checkpoint of the same architecture; every
// store parameter must be present.
void restore_parameters(const Checkpoint& ckpt, nn::ParameterStore& store,
                        const std::set<std::string>& optional_groups = {});

}  // namespace svs::trainer

#endif  // SVS_TRAINER_CHECKPOINT_H_
