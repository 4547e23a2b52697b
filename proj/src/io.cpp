#include "homsteer/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "homsteer/errors.hpp"

namespace homsteer {

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("expected a comma-separated integer list, got '" + text + "'");
    }
  }
  return out;
}

template <class T>
T field(const Json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string(what) + " needs '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const Json& j, const char* key, T fallback, const char* what) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, what);
}

// Wraps library construction errors so callers see a single error type.
template <class F>
auto as_config(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

void dump_canonical(const Json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        dump_canonical(value, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_canonical(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_canonical(j[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s(buf);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Groups

GroupPtr group_from_json(const Json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    static const std::regex pattern(R"(^(Z|D|S)(\d+)(?:(x|:)Z2)?$)");
    std::smatch m;
    if (!std::regex_match(s, m, pattern)) throw ConfigError("unknown group shorthand '" + s + "'");
    const int n = std::stoi(m[2]);
    return as_config("group " + s, [&] {
      if (m[3].matched) return make_semidirect(n, m[3] == ":");
      if (m[1] == "Z") return make_cyclic(n);
      if (m[1] == "D") return make_dihedral(n);
      return make_symmetric(n);
    });
  }
  const auto kind = field<std::string>(spec, "kind", "group spec");
  const int n = field<int>(spec, "n", "group spec");
  return as_config("group " + kind, [&] {
    if (kind == "cyclic") return make_cyclic(n);
    if (kind == "dihedral") return make_dihedral(n);
    if (kind == "symmetric") return make_symmetric(n);
    if (kind == "semidirect") return make_semidirect(n, field_or<bool>(spec, "flip", true, "group spec"));
    throw ConfigError("unknown group kind '" + kind + "'");
  });
}

Json group_to_json(const GroupTable& group) {
  switch (group.family()) {
    case GroupFamily::cyclic:
      return {{"kind", "cyclic"}, {"n", group.family_n()}};
    case GroupFamily::dihedral:
      return {{"kind", "dihedral"}, {"n", group.family_n()}};
    case GroupFamily::symmetric:
      return {{"kind", "symmetric"}, {"n", group.family_n()}};
    case GroupFamily::semidirect:
      return {{"kind", "semidirect"}, {"n", group.family_n()}, {"flip", group.family_flip()}};
    default:
      throw UnsupportedGroup("custom groups have no spec");
  }
}

// ---------------------------------------------------------------------------
// Subgroups

SubgroupPtr subgroup_from_json(const GroupPtr& group, const Json& spec) {
  auto make = [&](auto&& f) {
    return as_config("subgroup", [&] { return std::make_shared<const Subgroup>(f()); });
  };
  if (spec.is_array()) {
    std::vector<Element> elements;
    try {
      elements = spec.get<std::vector<Element>>();
    } catch (const Json::exception&) {
      throw ConfigError("subgroup element list must hold integers");
    }
    for (Element g : elements) {
      if (g < 0 || g >= group->order()) throw ConfigError("subgroup element out of range");
    }
    return make([&] { return Subgroup::from_elements(group, elements); });
  }
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    if (s == "trivial") return make([&] { return Subgroup::trivial(group); });
    if (s == "whole") return make([&] { return Subgroup::whole(group); });
    if (s == "flip") return make([&] { return flip_subgroup(group); });
    if (s.rfind("stab", 0) == 0) {
      const auto points = parse_int_list(s.substr(4));
      if (points.size() != 1) throw ConfigError("'stab' takes one point, e.g. stab0");
      const int point = points[0];
      return make([&] { return point_stabilizer(group, point); });
    }
    if (s.rfind("perm:", 0) == 0) {
      // Generated by one permutation in one-line notation, e.g. perm:1,0,2.
      const auto perm = parse_int_list(s.substr(5));
      const auto& perms = group->permutations();
      for (Element g = 0; g < static_cast<Element>(perms.size()); ++g) {
        if (perms[g] == perm) return make([&] { return Subgroup::generated(group, {g}); });
      }
      throw ConfigError("'" + s + "' is not an element of the group");
    }
    if (s.rfind("gen:", 0) == 0) {
      const auto gens = parse_int_list(s.substr(4));
      return subgroup_from_json(group, Json{{"kind", "generated"}, {"generators", gens}});
    }
    throw ConfigError("unknown subgroup shorthand '" + s + "'");
  }
  const auto kind = field<std::string>(spec, "kind", "subgroup spec");
  if (kind == "elements") return subgroup_from_json(group, field<Json>(spec, "elements", "subgroup spec"));
  if (kind == "stabilizer") {
    const int point = field_or<int>(spec, "point", 0, "subgroup spec");
    return make([&] { return point_stabilizer(group, point); });
  }
  if (kind == "generated") {
    const auto gens = field<std::vector<int>>(spec, "generators", "subgroup spec");
    for (Element g : gens) {
      if (g < 0 || g >= group->order()) throw ConfigError("generator out of range");
    }
    return make([&] { return Subgroup::generated(group, gens); });
  }
  if (kind == "trivial" || kind == "whole" || kind == "flip") return subgroup_from_json(group, Json(kind));
  throw ConfigError("unknown subgroup kind '" + kind + "'");
}

Json subgroup_to_json(const Subgroup& subgroup) { return Json(subgroup.elements()); }

// ---------------------------------------------------------------------------
// Representations

RepPtr rep_from_json(const SubgroupPtr& domain, const Json& spec) {
  if (spec.is_string()) {
    const std::string s = spec.get<std::string>();
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    Json obj = {{"kind", kind}};
    if (colon != std::string::npos) {
      const auto args = parse_int_list(s.substr(colon + 1));
      if (kind == "rotation") {
        obj["freqs"] = args;
      } else {
        if (args.size() != 1) throw ConfigError("rep shorthand '" + s + "' takes one dimension");
        obj["dim"] = args[0];
      }
    }
    return rep_from_json(domain, obj);
  }
  const auto kind = field<std::string>(spec, "kind", "rep spec");
  auto make = [&](auto&& f) {
    return as_config("rep " + kind, [&] { return std::make_shared<const Representation>(f()); });
  };
  RepPtr rep;
  if (kind == "trivial") {
    const int dim = field_or<int>(spec, "dim", 1, "rep spec");
    if (dim < 1) throw ConfigError("trivial rep needs dim >= 1");
    rep = make([&] { return trivial_rep(domain, dim); });
  } else if (kind == "regular") {
    rep = make([&] { return regular_rep(domain); });
  } else if (kind == "sign") {
    rep = make([&] { return sign_rep_z2(domain); });
  } else if (kind == "rotation") {
    const auto freqs = field<std::vector<int>>(spec, "freqs", "rotation rep spec");
    rep = make([&] { return rotation_block_rep(domain, freqs); });
  } else if (kind == "matrices") {
    const auto& list = field<Json>(spec, "matrices", "matrices rep spec");
    if (!list.is_array()) throw ConfigError("'matrices' must be a list");
    std::vector<Matrix> mats;
    for (const auto& m : list) mats.push_back(matrix_from_json(m));
    rep = make([&] { return Representation::from_matrices(domain, mats); });
  } else {
    throw ConfigError("unknown rep kind '" + kind + "'");
  }
  if (spec.contains("dim") && field<int>(spec, "dim", "rep spec") != rep->dim()) {
    throw ConfigError("rep '" + kind + "' has dimension " + std::to_string(rep->dim()) + ", spec says " +
                      spec["dim"].dump());
  }
  return rep;
}

Json rep_to_json(const Representation& rep) {
  if (rep.name() == "trivial") return {{"kind", "trivial"}, {"dim", rep.dim()}};
  if (rep.name() == "sign" || rep.name() == "regular") return {{"kind", rep.name()}};
  Json mats = Json::array();
  for (int i = 0; i < rep.domain().order(); ++i) mats.push_back(matrix_to_json(rep.at_position(i)));
  return {{"kind", "matrices"}, {"matrices", mats}};
}

Json parse_spec_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return Json::parse(text);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("malformed JSON spec: ") + e.what());
    }
  }
  return Json(text);
}

// ---------------------------------------------------------------------------
// Values

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& rows) {
  if (!rows.is_array()) throw ConfigError("matrix must be a list of rows");
  if (rows.empty()) return Matrix(0, 0);
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) throw ConfigError("matrix rows have unequal length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number()) throw ConfigError("matrix entries must be numbers");
      m(i, j) = rows[i][j].get<double>();
    }
  }
  return m;
}

namespace {

struct FeatureHeader {
  GroupPtr group;
  SubgroupPtr subgroup;
  RepPtr rep;
};

FeatureHeader read_header(const Json& j) {
  if (!j.is_object()) throw ConfigError("feature file must hold an object");
  FeatureHeader h;
  h.group = group_from_json(field<Json>(j, "group", "feature"));
  h.subgroup = subgroup_from_json(h.group, field<Json>(j, "subgroup", "feature"));
  h.rep = rep_from_json(h.subgroup, field<Json>(j, "rep", "feature"));
  return h;
}

// Values stored one array per point; transposed into dim x points.
Matrix read_values(const Json& j, int dim, int points) {
  const Matrix rows = matrix_from_json(field<Json>(j, "values", "feature"));
  if (rows.rows() != points || (points > 0 && rows.cols() != dim)) {
    throw ConfigError("feature values must be " + std::to_string(points) + " arrays of length " +
                      std::to_string(dim));
  }
  return rows.transpose();
}

}  // namespace

Json feature_to_json(const FeatureMap& f) {
  return {{"kind", "feature"},
          {"group", group_to_json(f.group())},
          {"subgroup", subgroup_to_json(f.rep().domain())},
          {"rep", rep_to_json(f.rep())},
          {"values", matrix_to_json(f.values().transpose())}};
}

FeatureMap feature_from_json(const Json& j) {
  const FeatureHeader h = read_header(j);
  Matrix values = read_values(j, h.rep->dim(), h.group->order());
  return as_config("feature", [&] { return FeatureMap(h.rep, std::move(values)); });
}

Json section_feature_to_json(const SectionFeature& f) {
  return {{"kind", "section"},
          {"group", group_to_json(f.quotient().group())},
          {"subgroup", subgroup_to_json(f.quotient().subgroup())},
          {"rep", rep_to_json(f.rep())},
          {"section", f.quotient().section_table()},
          {"values", matrix_to_json(f.values().transpose())}};
}

SectionFeature section_feature_from_json(const Json& j) {
  const FeatureHeader h = read_header(j);
  std::optional<std::vector<Element>> hint;
  if (j.contains("section")) hint = field<std::vector<Element>>(j, "section", "section feature");
  auto q = as_config("section", [&] { return std::make_shared<const Quotient>(left_cosets(h.subgroup, hint)); });
  Matrix values = read_values(j, h.rep->dim(), q->size());
  return as_config("section feature", [&] { return SectionFeature(q, h.rep, std::move(values)); });
}

Json kernel_to_json(const OneArgKernel& k) {
  Json blocks = Json::array();
  for (Element g = 0; g < k.group().order(); ++g) blocks.push_back(matrix_to_json(k.at(g)));
  return blocks;
}

// ---------------------------------------------------------------------------
// Files

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_canonical(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace homsteer
