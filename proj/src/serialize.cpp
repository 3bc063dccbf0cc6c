// SPDX-License-Identifier: Apache-2.0
#include "symtensor/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "symtensor/sym_tensor.hpp"

namespace symtensor {

using nlohmann::json;

namespace {

json space_to_obj(const RepSpace& space) {
  json sectors = json::array();
  for (const auto& s : space.sectors()) sectors.push_back({s.charge, s.degeneracy});
  return {{"system", space.system()->name()}, {"sectors", sectors}};
}

RepSpace space_from_obj(const json& j) {
  auto sys = charge_system_by_name(j.at("system").get<std::string>());
  std::vector<RepSpace::Sector> sectors;
  for (const auto& e : j.at("sectors"))
    sectors.push_back({e.at(0).get<Charge>(), e.at(1).get<int>()});
  return RepSpace(std::move(sys), std::move(sectors));
}

json tree_to_obj(const FusionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) nodes.push_back({n.left, n.right});
  return {{"leaves", tree.leaf_count()}, {"nodes", nodes}};
}

FusionTree tree_from_obj(const json& j) {
  std::vector<FusionTree::Node> nodes;
  for (const auto& e : j.at("nodes"))
    nodes.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  return FusionTree(j.at("leaves").get<int>(), std::move(nodes));
}

json path_to_obj(const SectorPath& p) {
  return {{"leaves", p.leaves}, {"internals", p.internals}};
}

SectorPath path_from_obj(const json& j) {
  SectorPath p;
  p.leaves = j.at("leaves").get<std::vector<Charge>>();
  p.internals = j.at("internals").get<std::vector<Charge>>();
  return p;
}

std::string dir_name(Direction d) {
  switch (d) {
    case Direction::Out: return "out";
    case Direction::In: return "in";
    default: return "in-r";
  }
}

Direction dir_from_name(const std::string& s) {
  if (s == "out") return Direction::Out;
  if (s == "in") return Direction::In;
  if (s == "in-r") return Direction::InR;
  throw std::invalid_argument("unknown direction name: " + s);
}

}  // namespace

std::string rep_space_to_json(const RepSpace& space) { return space_to_obj(space).dump(); }

RepSpace rep_space_from_json(const std::string& text) {
  return space_from_obj(json::parse(text));
}

std::string sym_tensor_to_json(const SymTensor& t) {
  json j;
  j["format_version"] = kFormatVersion;
  j["system"] = t.system()->name();
  json spaces = json::array(), dirs = json::array();
  for (int l = 0; l < t.rank(); ++l) {
    spaces.push_back(space_to_obj(t.declared_space(l)));
    dirs.push_back(dir_name(t.direction(l)));
  }
  j["spaces"] = spaces;
  j["directions"] = dirs;
  j["tree"] = tree_to_obj(t.tree());
  j["root"] = t.root();
  json blocks = json::array();
  const SymTensor flat = absorb_bends(t);
  for (const auto& [p, b] : flat.blocks())
    blocks.push_back({{"path", path_to_obj(p)}, {"data", b.data()}});
  j["blocks"] = blocks;
  return j.dump();
}

SymTensor sym_tensor_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw std::invalid_argument("sym_tensor_from_json: unsupported format version");
  std::vector<RepSpace> spaces;
  for (const auto& e : j.at("spaces")) spaces.push_back(space_from_obj(e));
  std::vector<Direction> dirs;
  for (const auto& e : j.at("directions")) dirs.push_back(dir_from_name(e.get<std::string>()));
  SymTensor t(spaces, dirs, tree_from_obj(j.at("tree")), j.at("root").get<Charge>());
  for (const auto& e : j.at("blocks")) {
    const SectorPath p = path_from_obj(e.at("path"));
    DenseTensorD blk(t.block_dims(p));
    const auto data = e.at("data").get<std::vector<double>>();
    if (static_cast<long>(data.size()) != blk.size())
      throw std::invalid_argument("sym_tensor_from_json: block size mismatch");
    blk.data() = data;
    t.set_block(p, std::move(blk));
  }
  return t;
}

void save_sym_tensor(const std::string& path, const SymTensor& t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_sym_tensor: cannot open " + path);
  os << sym_tensor_to_json(t);
}

SymTensor load_sym_tensor(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_sym_tensor: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return sym_tensor_from_json(text);
}

namespace {

std::string key_file(const std::string& dir, const std::string& key) {
  // FNV-1a over the key string names the file; the key inside the file is
  // authoritative against collisions.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return dir + "/gamma-" + buf + ".json";
}

}  // namespace

std::shared_ptr<const GammaMap> load_gamma_from_disk(const std::string& dir,
                                                     const std::string& key) {
  const std::string file = key_file(dir, key);
  std::ifstream is(file);
  if (!is) return nullptr;
  try {
    json j;
    is >> j;
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw std::runtime_error("format version mismatch");
    if (j.at("key").get<std::string>() != key) throw std::runtime_error("key mismatch");

    const FusionTree tin = tree_from_obj(j.at("tree_in"));
    const FusionTree tout = tree_from_obj(j.at("tree_out"));
    const auto perm = j.at("perm").get<std::vector<int>>();
    const Charge root = j.at("root").get<Charge>();

    std::vector<SectorPath> in_paths, out_paths;
    for (const auto& e : j.at("in_paths")) in_paths.push_back(path_from_obj(e));
    for (const auto& e : j.at("out_paths")) out_paths.push_back(path_from_obj(e));
    std::vector<std::vector<GammaMap::Term>> table(in_paths.size());
    for (const auto& e : j.at("table")) {
      const int i = e.at(0).get<int>();
      table.at(static_cast<std::size_t>(i))
          .push_back({e.at(1).get<int>(), e.at(2).get<double>()});
    }
    return std::make_shared<const GammaMap>(
        GammaMap::from_parts(tin, tout, perm, root, std::move(in_paths),
                             std::move(out_paths), std::move(table)));
  } catch (const std::exception& ex) {
    std::cerr << "warning: gamma cache file " << file
              << " is corrupt or stale, rebuilding (" << ex.what() << ")\n";
    return nullptr;
  }
}

void save_gamma_to_disk(const std::string& dir, const std::string& key,
                        const GammaMap& map) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  json j;
  j["format_version"] = kFormatVersion;
  j["key"] = key;
  j["tree_in"] = tree_to_obj(map.tree_in());
  j["tree_out"] = tree_to_obj(map.tree_out());
  j["perm"] = map.perm();
  j["root"] = map.root();
  json ip = json::array(), op = json::array(), table = json::array();
  for (const auto& p : map.in_paths()) ip.push_back(path_to_obj(p));
  for (const auto& p : map.out_paths()) op.push_back(path_to_obj(p));
  for (std::size_t i = 0; i < map.table().size(); ++i)
    for (const auto& t : map.table()[i])
      table.push_back({static_cast<int>(i), t.out_path, t.coeff});
  j["in_paths"] = ip;
  j["out_paths"] = op;
  j["table"] = table;
  std::ofstream os(key_file(dir, key));
  if (os) os << j.dump();
}

}  // namespace symtensor
