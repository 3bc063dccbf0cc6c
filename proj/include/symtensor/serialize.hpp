// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "symtensor/fusion_tree.hpp"
#include "symtensor/gamma.hpp"

namespace symtensor {

class SymTensor;

inline constexpr int kFormatVersion = 1;

/// JSON text of a representation space: {"system":"su2","sectors":[[charge,d],..]}.
std::string rep_space_to_json(const RepSpace& space);
RepSpace rep_space_from_json(const std::string& text);

/// JSON round trip of a full tensor (header + blocks, row-major data).
std::string sym_tensor_to_json(const SymTensor& t);
SymTensor sym_tensor_from_json(const std::string& text);

void save_sym_tensor(const std::string& path, const SymTensor& t);
SymTensor load_sym_tensor(const std::string& path);

/// Disk persistence of Gamma maps (versioned JSON keyed by the cache key).
/// A corrupt or mismatched file is reported to stderr and treated as absent.
std::shared_ptr<const GammaMap> load_gamma_from_disk(const std::string& dir,
                                                     const std::string& key);
void save_gamma_to_disk(const std::string& dir, const std::string& key,
                        const GammaMap& map);

}  // namespace symtensor
