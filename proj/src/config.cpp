#include "domino/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "domino/dom1.hpp"

namespace domino {

namespace {

using nlohmann::json;

constexpr double kRef = 64.0;  // default layout is drafted in 64-pixel units

Ellipse ring(std::size_t cls, double cx, double cy, double rx, double ry) {
  return {cls, cx / kRef, cy / kRef, rx / kRef, ry / kRef};
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::Config, where + " must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) {
      fail(ErrorKind::Config, "unknown config key '" + where + "." + item.key() + "'");
    }
  }
}

std::string key_path(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

void read_double(const json& obj, const char* key, const std::string& where, double& dst) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(ErrorKind::Config, "config key '" + key_path(where, key) + "' must be a number");
  dst = v.get<double>();
  if (!std::isfinite(dst)) fail(ErrorKind::Config, "config key '" + key_path(where, key) + "' is not finite");
}

template <typename Int>
void read_uint(const json& obj, const char* key, const std::string& where, Int& dst) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    fail(ErrorKind::Config, "config key '" + key_path(where, key) + "' must be a non-negative integer");
  }
  dst = static_cast<Int>(v.get<std::uint64_t>());
}

std::string read_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(ErrorKind::Config, "config key '" + where + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> read_members(const json& v, const ClassSet& classes,
                                      const std::string& where) {
  if (!v.is_array()) fail(ErrorKind::Config, "config key '" + where + "' must be a list of class names");
  std::vector<std::size_t> out;
  for (const auto& name : v) out.push_back(classes.index_of(read_string(name, where)));
  return out;
}

HierarchyConfig parse_hierarchy(const json& h, const ClassSet& classes) {
  check_keys(h, {"max_penalty", "within_penalty", "groups"}, "hierarchy");
  HierarchyConfig out;
  read_double(h, "max_penalty", "hierarchy", out.max_penalty);
  read_double(h, "within_penalty", "hierarchy", out.within_penalty);
  if (!h.contains("groups") || !h.at("groups").is_array()) {
    fail(ErrorKind::Config, "config key 'hierarchy.groups' must be a list");
  }
  std::vector<HierarchyGroup> groups;
  for (const auto& g : h.at("groups")) {
    check_keys(g, {"name", "classes"}, "hierarchy.groups[]");
    if (!g.contains("name") || !g.contains("classes")) {
      fail(ErrorKind::Config, "hierarchy groups need 'name' and 'classes'");
    }
    groups.push_back({read_string(g.at("name"), "hierarchy.groups[].name"),
                      read_members(g.at("classes"), classes, "hierarchy.groups[].classes")});
  }
  out.spec = HierarchySpec(std::move(groups), classes.size());
  if (out.within_penalty > out.max_penalty) {
    fail(ErrorKind::Config, "hierarchy.within_penalty exceeds hierarchy.max_penalty");
  }
  return out;
}

GroupMap parse_group_map(const json& g, const ClassSet& classes) {
  check_keys(g, {"groups"}, "group_map");
  if (!g.contains("groups") || !g.at("groups").is_array()) {
    fail(ErrorKind::Config, "config key 'group_map.groups' must be a list");
  }
  std::vector<std::string> names;
  std::vector<std::size_t> mapping(classes.size(), SIZE_MAX);
  for (const auto& group : g.at("groups")) {
    check_keys(group, {"name", "classes"}, "group_map.groups[]");
    if (!group.contains("name") || !group.contains("classes")) {
      fail(ErrorKind::Config, "group_map groups need 'name' and 'classes'");
    }
    names.push_back(read_string(group.at("name"), "group_map.groups[].name"));
    for (auto c : read_members(group.at("classes"), classes, "group_map.groups[].classes")) {
      if (mapping[c] != SIZE_MAX) {
        fail(ErrorKind::Config, "class '" + classes.name(c) + "' appears in two merge groups");
      }
      mapping[c] = names.size() - 1;
    }
  }
  for (std::size_t c = 0; c < mapping.size(); ++c) {
    if (mapping[c] == SIZE_MAX) {
      fail(ErrorKind::Config, "class '" + classes.name(c) + "' is in no merge group");
    }
  }
  try {
    return GroupMap(std::move(mapping), std::move(names));
  } catch (const Error& e) {
    fail(ErrorKind::Config, std::string("group_map: ") + e.what());
  }
}

void parse_phantom(const json& p, const ClassSet& classes, PhantomConfig& out) {
  check_keys(p, {"size", "class_means", "noise_sigma", "blur_radius", "background", "layout",
                 "center_jitter", "scale_jitter", "seed"},
             "phantom");
  if (p.contains("size")) {
    std::uint64_t size = 0;
    read_uint(p, "size", "phantom", size);
    if (size > 4096) fail(ErrorKind::Config, "phantom.size is too large");
    out.size = static_cast<int>(size);
  }
  read_double(p, "noise_sigma", "phantom", out.noise_sigma);
  read_double(p, "blur_radius", "phantom", out.blur_radius);
  read_double(p, "center_jitter", "phantom", out.center_jitter);
  read_double(p, "scale_jitter", "phantom", out.scale_jitter);
  read_uint(p, "seed", "phantom", out.seed);
  if (p.contains("background")) {
    out.background = classes.index_of(read_string(p.at("background"), "phantom.background"));
  }
  if (p.contains("class_means")) {
    const auto& means = p.at("class_means");
    if (!means.is_object()) {
      fail(ErrorKind::Config, "config key 'phantom.class_means' must map class names to numbers");
    }
    std::vector<double> values(classes.size(), std::nan(""));
    for (const auto& item : means.items()) {
      const std::size_t c = classes.index_of(item.key());
      if (!item.value().is_number()) {
        fail(ErrorKind::Config, "config key 'phantom.class_means." + item.key() + "' must be a number");
      }
      values[c] = item.value().get<double>();
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (std::isnan(values[c])) {
        fail(ErrorKind::Config, "phantom.class_means lacks class '" + classes.name(c) + "'");
      }
    }
    out.class_means = std::move(values);
  }
  if (p.contains("layout")) {
    const auto& layout = p.at("layout");
    if (!layout.is_array()) fail(ErrorKind::Config, "config key 'phantom.layout' must be a list");
    out.layout.clear();
    for (const auto& e : layout) {
      check_keys(e, {"class", "cx", "cy", "rx", "ry"}, "phantom.layout[]");
      if (!e.contains("class")) fail(ErrorKind::Config, "layout entries need a 'class'");
      Ellipse el;
      el.cls = classes.index_of(read_string(e.at("class"), "phantom.layout[].class"));
      read_double(e, "cx", "phantom.layout[]", el.cx);
      read_double(e, "cy", "phantom.layout[]", el.cy);
      read_double(e, "rx", "phantom.layout[]", el.rx);
      read_double(e, "ry", "phantom.layout[]", el.ry);
      out.layout.push_back(el);
    }
  }
}

void parse_train(const json& t, TrainConfig& out) {
  check_keys(t, {"iterations", "learning_rate", "seed", "beta", "scale", "eval_interval",
                 "adam_beta1", "adam_beta2", "adam_epsilon", "patch_radius", "hidden_units"},
             "train");
  read_uint(t, "iterations", "train", out.iterations);
  read_double(t, "learning_rate", "train", out.learning_rate);
  read_uint(t, "seed", "train", out.seed);
  read_double(t, "beta", "train", out.loss.beta);
  read_double(t, "scale", "train", out.scale);
  read_uint(t, "eval_interval", "train", out.eval_interval);
  read_double(t, "adam_beta1", "train", out.adam_beta1);
  read_double(t, "adam_beta2", "train", out.adam_beta2);
  read_double(t, "adam_epsilon", "train", out.adam_epsilon);
  read_uint(t, "patch_radius", "train", out.patch_radius);
  read_uint(t, "hidden_units", "train", out.hidden_units);
}

void parse_loss(const json& l, LossConfig& out) {
  check_keys(l, {"lambda_ce", "lambda_dice", "epsilon"}, "loss");
  read_double(l, "lambda_ce", "loss", out.lambda_ce);
  read_double(l, "lambda_dice", "loss", out.lambda_dice);
  read_double(l, "epsilon", "loss", out.epsilon);
}

json names_of(const std::vector<std::size_t>& members, const ClassSet& classes) {
  json out = json::array();
  for (auto m : members) out.push_back(classes.name(m));
  return out;
}

}  // namespace

void RunConfig::validate() const {
  try {
    phantom.validate();
    train.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  if (phantom.num_classes() != classes.size()) {
    fail(ErrorKind::Config, "phantom class means do not match the class list");
  }
  if (hierarchy && hierarchy->spec.num_classes() != classes.size()) {
    fail(ErrorKind::Config, "hierarchy does not match the class list");
  }
  if (group_map && group_map->fine_classes() != classes.size()) {
    fail(ErrorKind::Config, "group_map does not match the class list");
  }
  if (eval.bins < 2) fail(ErrorKind::Config, "eval.bins must be at least 2");
  if (eval.max_top_n < 1) fail(ErrorKind::Config, "eval.max_top_n must be at least 1");
}

RunConfig default_head_config() {
  RunConfig cfg;
  cfg.classes = ClassSet({"air", "skin", "fat", "muscle", "cortical_bone", "cancellous_bone",
                          "blood", "csf", "eyes", "gm", "wm"});
  enum : std::size_t { Air, Skin, Fat, Muscle, Cortical, Cancellous, Blood, Csf, Eyes, Gm, Wm };

  auto& p = cfg.phantom;
  p.size = 64;
  // Within-group pairs (the two bones, CSF and eyes) sit 0.05 apart.
  p.class_means = {0.02, 0.55, 0.90, 0.40, 0.08, 0.13, 0.80, 0.20, 0.25, 0.50, 0.70};
  p.noise_sigma = 0.05;
  p.blur_radius = 1.0;
  p.background = Air;
  p.layout = {
      ring(Skin, 32, 32, 28, 30),
      ring(Fat, 32, 32, 26, 28),
      ring(Muscle, 32, 32, 24, 26),
      ring(Cortical, 32, 32, 22, 24),
      ring(Cancellous, 32, 32, 20, 22),
      ring(Cortical, 32, 32, 18.5, 20.5),
      ring(Csf, 32, 32, 17, 19),
      ring(Gm, 32, 32, 14, 16),
      ring(Wm, 32, 32, 10, 12),
      ring(Air, 32, 9.5, 3, 1.6),
      ring(Eyes, 22, 8, 3.2, 2.6),
      ring(Eyes, 42, 8, 3.2, 2.6),
      ring(Blood, 26, 44, 1.6, 1.6),
      ring(Blood, 38, 44, 1.6, 1.6),
  };
  p.center_jitter = 0.03;
  p.scale_jitter = 0.05;
  p.seed = 1;

  cfg.train.loss.beta = kDefaultBeta;

  HierarchyConfig h;
  h.spec = HierarchySpec(
      {
          {"WM", {Wm}},
          {"GM", {Gm}},
          {"CSF", {Csf, Eyes}},
          {"Bone", {Cancellous, Cortical}},
          {"Soft tissue", {Skin, Fat, Muscle, Eyes}},
          {"Air", {Air}},
          {"Blood", {Blood}},
      },
      cfg.classes.size());
  cfg.hierarchy = h;

  // Six coarse tissues; blood and eyes fold into soft tissue.
  std::vector<std::size_t> to_coarse(cfg.classes.size());
  enum : std::size_t { CWm, CGm, CCsf, CBone, CSoft, CAir };
  to_coarse[Air] = CAir;
  to_coarse[Skin] = CSoft;
  to_coarse[Fat] = CSoft;
  to_coarse[Muscle] = CSoft;
  to_coarse[Cortical] = CBone;
  to_coarse[Cancellous] = CBone;
  to_coarse[Blood] = CSoft;
  to_coarse[Csf] = CCsf;
  to_coarse[Eyes] = CSoft;
  to_coarse[Gm] = CGm;
  to_coarse[Wm] = CWm;
  cfg.group_map = GroupMap(std::move(to_coarse), {"WM", "GM", "CSF", "Bone", "Soft tissue", "Air"});
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"classes", "phantom", "train", "loss", "hierarchy", "group_map", "eval"}, "");

  RunConfig cfg = default_head_config();
  if (root.contains("classes")) {
    const auto& names = root.at("classes");
    if (!names.is_array()) fail(ErrorKind::Config, "config key 'classes' must be a list");
    std::vector<std::string> list;
    for (const auto& n : names) list.push_back(read_string(n, "classes"));
    ClassSet classes(std::move(list));
    if (classes != cfg.classes) {
      cfg.classes = std::move(classes);
      cfg.hierarchy.reset();
      cfg.group_map.reset();
      cfg.phantom.class_means.clear();
      cfg.phantom.layout.clear();
      cfg.phantom.background = 0;
    }
  }
  if (root.contains("phantom")) parse_phantom(root.at("phantom"), cfg.classes, cfg.phantom);
  if (root.contains("train")) parse_train(root.at("train"), cfg.train);
  if (root.contains("loss")) parse_loss(root.at("loss"), cfg.train.loss);
  if (root.contains("hierarchy")) cfg.hierarchy = parse_hierarchy(root.at("hierarchy"), cfg.classes);
  if (root.contains("group_map")) cfg.group_map = parse_group_map(root.at("group_map"), cfg.classes);
  if (root.contains("eval")) {
    const auto& e = root.at("eval");
    check_keys(e, {"bins", "max_top_n"}, "eval");
    read_uint(e, "bins", "eval", cfg.eval.bins);
    read_uint(e, "max_top_n", "eval", cfg.eval.max_top_n);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    fail(ErrorKind::Config, "cannot read config " + path.string());
  }
  try {
    return parse_run_config(text);
  } catch (const Error& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
}

std::string run_config_json(const RunConfig& cfg) {
  json root;
  root["classes"] = cfg.classes.names();

  const auto& p = cfg.phantom;
  json means = json::object();
  for (std::size_t c = 0; c < p.class_means.size(); ++c) means[cfg.classes.name(c)] = p.class_means[c];
  json layout = json::array();
  for (const auto& e : p.layout) {
    layout.push_back({{"class", cfg.classes.name(e.cls)}, {"cx", e.cx}, {"cy", e.cy},
                      {"rx", e.rx}, {"ry", e.ry}});
  }
  root["phantom"] = {{"size", p.size},
                     {"class_means", means},
                     {"noise_sigma", p.noise_sigma},
                     {"blur_radius", p.blur_radius},
                     {"background", cfg.classes.name(p.background)},
                     {"layout", layout},
                     {"center_jitter", p.center_jitter},
                     {"scale_jitter", p.scale_jitter},
                     {"seed", p.seed}};

  const auto& t = cfg.train;
  root["train"] = {{"iterations", t.iterations},     {"learning_rate", t.learning_rate},
                   {"seed", t.seed},                 {"beta", t.loss.beta},
                   {"scale", t.scale},               {"eval_interval", t.eval_interval},
                   {"adam_beta1", t.adam_beta1},     {"adam_beta2", t.adam_beta2},
                   {"adam_epsilon", t.adam_epsilon}, {"patch_radius", t.patch_radius},
                   {"hidden_units", t.hidden_units}};
  root["loss"] = {{"lambda_ce", t.loss.lambda_ce},
                  {"lambda_dice", t.loss.lambda_dice},
                  {"epsilon", t.loss.epsilon}};

  if (cfg.hierarchy) {
    json groups = json::array();
    for (const auto& g : cfg.hierarchy->spec.groups()) {
      groups.push_back({{"name", g.name}, {"classes", names_of(g.members, cfg.classes)}});
    }
    root["hierarchy"] = {{"max_penalty", cfg.hierarchy->max_penalty},
                         {"within_penalty", cfg.hierarchy->within_penalty},
                         {"groups", groups}};
  }
  if (cfg.group_map) {
    json groups = json::array();
    for (std::size_t k = 0; k < cfg.group_map->coarse_classes(); ++k) {
      std::vector<std::size_t> members;
      for (std::size_t c = 0; c < cfg.group_map->fine_classes(); ++c) {
        if (cfg.group_map->coarse_of(c) == k) members.push_back(c);
      }
      groups.push_back({{"name", cfg.group_map->coarse_names()[k]},
                        {"classes", names_of(members, cfg.classes)}});
    }
    root["group_map"] = {{"groups", groups}};
  }
  root["eval"] = {{"bins", cfg.eval.bins}, {"max_top_n", cfg.eval.max_top_n}};
  return root.dump(2) + "\n";
}

}  // namespace domino
