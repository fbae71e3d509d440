// Copyright 2026 The stylematch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stylematch/datagen.hpp"
#include "stylematch/discriminator.hpp"
#include "stylematch/network.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::io {

/// Weight file: "SMWT" magic, little-endian flag byte, format version,
/// then named blocks (name, shape, row-major f64 values).
void write_weights(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& blocks);
std::vector<std::pair<std::string, Tensor>> read_weights(
    const std::string& path);

std::vector<std::pair<std::string, const Tensor*>> named_params(
    const net::BackboneParams& bp, const net::ClassifierParams& cp);
std::vector<std::pair<std::string, const Tensor*>> named_params(
    const disc::Params& p);

/// Loads by block name into existing parameter structs (shapes must match).
void load_weights(const std::string& path, net::BackboneParams& bp,
                  net::ClassifierParams& cp);
void load_weights(const std::string& path, disc::Params& p);

/// Flat binary container: i64 count, i64 dim, then count*dim row-major f32.
void write_tensor_container(const std::string& path,
                            const std::vector<Tensor>& tensors);
/// Reads back as tensors of the given shape (numel must equal dim).
std::vector<Tensor> read_tensor_container(const std::string& path,
                                          const std::vector<int64_t>& shape);

void write_curves_csv(const std::string& path,
                      const std::vector<net::CurvePoint>& curves);

/// Dataset directory layout:
///   manifest.json, source_images.bin, target_images.bin, pairs.csv,
///   folds/fold_XX.csv, gallery.csv, probes_known.csv, probes_unknown.csv
void write_dataset(const std::string& dir, const datagen::DatasetBundle& ds);
datagen::DatasetBundle load_dataset(const std::string& dir);

std::string format_double(double v);  // shortest round-trip decimal
uint64_t fnv1a_file(const std::string& path);

}  // namespace stylematch::io
