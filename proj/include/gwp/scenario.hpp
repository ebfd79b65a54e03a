#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwp/core.hpp"
#include "gwp/propagators.hpp"
#include "gwp/trigger.hpp"

namespace gwp::scenario {

using json = nlohmann::json;

inline constexpr int format_version = 1;

// Input that does not match the scenario schema. `pointer` locates the offending value.
struct SchemaError : DomainError {
    std::string pointer;
    SchemaError(const std::string& ptr, const std::string& msg)
        : DomainError((ptr.empty() ? std::string("/") : ptr) + ": " + msg), pointer(ptr) {}
};

inline const char* schema_text() {
    return R"JSON({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "gwp scenario",
  "type": "object",
  "additionalProperties": false,
  "required": ["version", "units", "initial_state", "task"],
  "properties": {
    "version": {"const": 1},
    "description": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "units": {
      "type": "object",
      "additionalProperties": false,
      "required": ["mass", "hbar"],
      "properties": {
        "mass": {"type": "number", "exclusiveMinimum": 0},
        "hbar": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "initial_state": {"$ref": "#/$defs/state"},
    "task": {
      "oneOf": [
        {"$ref": "#/$defs/task_evolve"},
        {"$ref": "#/$defs/task_design_linewidth"},
        {"$ref": "#/$defs/task_design_inverse_free"},
        {"$ref": "#/$defs/task_design_quarter_period"},
        {"$ref": "#/$defs/task_design_roundtrip"},
        {"$ref": "#/$defs/task_trigger"}
      ]
    },
    "verify": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "selectivity_tolerance": {"type": "number", "exclusiveMinimum": 0},
        "grid_points": {"enum": [256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536]},
        "x_min": {"type": "number"},
        "x_max": {"type": "number"},
        "max_dt": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "result_file": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        "trajectory_file": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        "precision": {"type": "integer", "minimum": 1, "maximum": 17},
        "snapshots": {
          "oneOf": [
            {
              "type": "object",
              "additionalProperties": false,
              "required": ["rule"],
              "properties": {"rule": {"const": "none"}}
            },
            {
              "type": "object",
              "additionalProperties": false,
              "required": ["rule"],
              "properties": {"rule": {"const": "per_segment"}}
            },
            {
              "type": "object",
              "additionalProperties": false,
              "required": ["rule", "dt"],
              "properties": {
                "rule": {"const": "fixed_step"},
                "dt": {"type": "number", "exclusiveMinimum": 0}
              }
            }
          ]
        }
      }
    }
  },
  "$defs": {
    "state": {
      "type": "object",
      "additionalProperties": false,
      "required": ["x_center", "mean_momentum", "delta_sq", "tw"],
      "properties": {
        "x_center": {"type": "number"},
        "mean_momentum": {"type": "number"},
        "delta_sq": {"type": "number", "exclusiveMinimum": 0},
        "tw": {"type": "number"},
        "phase": {"type": ["number", "null"]}
      }
    },
    "time_function": {
      "oneOf": [
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "value"],
          "properties": {"type": {"const": "constant"}, "value": {"type": "number"}}
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "amplitude", "omega"],
          "properties": {
            "type": {"const": "sinusoid"},
            "amplitude": {"type": "number"},
            "omega": {"type": "number"},
            "phase": {"type": "number"},
            "offset": {"type": "number"}
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "t", "v"],
          "properties": {
            "type": {"const": "tabulated"},
            "t": {"type": "array", "minItems": 1, "items": {"type": "number"}},
            "v": {"type": "array", "minItems": 1, "items": {"type": "number"}}
          }
        }
      ]
    },
    "segment": {
      "oneOf": [
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "T"],
          "properties": {"type": {"const": "free"}, "T": {"type": "number", "minimum": 0}}
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "T"],
          "properties": {"type": {"const": "inverse_free"}, "T": {"type": "number", "minimum": 0}}
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "omega", "T"],
          "properties": {
            "type": {"const": "harmonic"},
            "omega": {"type": "number", "exclusiveMinimum": 0},
            "T": {"type": "number", "minimum": 0}
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "omega", "T_prime"],
          "properties": {
            "type": {"const": "inverse_harmonic"},
            "omega": {"type": "number", "exclusiveMinimum": 0},
            "T_prime": {"type": "number", "minimum": 0},
            "k": {"type": "integer", "minimum": 0}
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "omega", "T", "force"],
          "properties": {
            "type": {"const": "forced_harmonic"},
            "omega": {"type": "number", "exclusiveMinimum": 0},
            "T": {"type": "number", "minimum": 0},
            "force": {"$ref": "#/$defs/time_function"}
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["type", "T"],
          "properties": {
            "type": {"const": "quadratic"},
            "T": {"type": "number", "minimum": 0},
            "b": {"$ref": "#/$defs/time_function"},
            "c": {"$ref": "#/$defs/time_function"},
            "d": {"$ref": "#/$defs/time_function"},
            "f": {"$ref": "#/$defs/time_function"}
          }
        }
      ]
    },
    "task_evolve": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "segments"],
      "properties": {
        "kind": {"const": "evolve"},
        "segments": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/segment"}}
      }
    },
    "task_design_linewidth": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "omega", "target"],
      "properties": {
        "kind": {"const": "design_linewidth"},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "target": {
          "type": "object",
          "additionalProperties": false,
          "required": ["delta_y_sq", "tw"],
          "properties": {
            "delta_y_sq": {"type": "number", "exclusiveMinimum": 0},
            "tw": {"type": "number"}
          }
        }
      }
    },
    "task_design_inverse_free": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "T", "omega1", "omega2"],
      "properties": {
        "kind": {"const": "design_inverse_free"},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "omega1": {"type": "number", "exclusiveMinimum": 0},
        "omega2": {"type": "number", "exclusiveMinimum": 0},
        "branch": {"enum": ["upper", "lower"]}
      }
    },
    "task_design_quarter_period": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "omega", "omega_c"],
      "properties": {
        "kind": {"const": "design_quarter_period"},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "omega_c": {"type": "number", "exclusiveMinimum": 0},
        "k": {"type": "integer", "minimum": 0}
      }
    },
    "task_design_roundtrip": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "draws"],
      "properties": {
        "kind": {"const": "design_roundtrip"},
        "draws": {"type": "integer", "minimum": 1, "maximum": 10000},
        "omega": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "task_trigger": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind", "trap_omega", "fock_size", "drive", "program", "branches"],
      "properties": {
        "kind": {"const": "trigger"},
        "trap_omega": {"type": "number", "exclusiveMinimum": 0},
        "fock_size": {"type": "integer", "minimum": 2, "maximum": 400},
        "drive": {
          "type": "object",
          "additionalProperties": false,
          "required": ["alpha", "rabi", "k_diff"],
          "properties": {
            "alpha": {"type": "number"},
            "gamma": {"type": "number"},
            "rabi": {"type": "number"},
            "k_sum": {"type": "number"},
            "k_diff": {"type": "number"}
          }
        },
        "program": {
          "type": "object",
          "additionalProperties": false,
          "required": ["variant", "dt"],
          "properties": {
            "variant": {"enum": ["basic", "improved", "realizable"]},
            "dt": {"type": "number", "exclusiveMinimum": 0},
            "segments": {"type": "integer", "minimum": 1}
          }
        },
        "branches": {"type": "array", "minItems": 1, "items": {"enum": ["g0", "g1", "e"]}}
      }
    }
  }
})JSON";
}

inline const json& schema() {
    static const json s = json::parse(schema_text());
    return s;
}

namespace detail {

struct Failure {
    std::string pointer, message;
};

inline bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    return false;
}

inline const json& resolve(const json& root, const json& node) {
    if (!node.contains("$ref")) return node;
    const auto ref = node["$ref"].get<std::string>();
    return resolve(root, root.at(json::json_pointer(ref.substr(1))));
}

inline std::string child(const std::string& ptr, const std::string& key) {
    std::string k;
    for (char c : key) {
        if (c == '~') k += "~0";
        else if (c == '/') k += "~1";
        else k += c;
    }
    return ptr + "/" + k;
}

// First violation of `node` by `v`, if any. Supports the keywords the scenario schema uses.
inline std::optional<Failure> check(const json& root, const json& raw, const json& v, const std::string& ptr) {
    const json& node = resolve(root, raw);
    if (node.contains("type")) {
        const json& t = node["type"];
        bool ok = false;
        if (t.is_string()) ok = type_matches(v, t.get<std::string>());
        else
            for (const auto& x : t) ok = ok || type_matches(v, x.get<std::string>());
        if (!ok) return Failure{ptr, "expected type " + t.dump()};
    }
    if (node.contains("const") && v != node["const"])
        return Failure{ptr, "expected the value " + node["const"].dump()};
    if (node.contains("enum")) {
        bool found = false;
        for (const auto& x : node["enum"]) found = found || x == v;
        if (!found) return Failure{ptr, "expected one of " + node["enum"].dump()};
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        if (!std::isfinite(x)) return Failure{ptr, "number must be finite"};
        if (node.contains("minimum") && x < node["minimum"].get<double>())
            return Failure{ptr, "must be >= " + node["minimum"].dump()};
        if (node.contains("maximum") && x > node["maximum"].get<double>())
            return Failure{ptr, "must be <= " + node["maximum"].dump()};
        if (node.contains("exclusiveMinimum") && !(x > node["exclusiveMinimum"].get<double>()))
            return Failure{ptr, "must be > " + node["exclusiveMinimum"].dump()};
    }
    if (v.is_string() && node.contains("pattern") &&
        !std::regex_match(v.get<std::string>(), std::regex(node["pattern"].get<std::string>())))
        return Failure{ptr, "does not match " + node["pattern"].dump()};
    if (v.is_array()) {
        if (node.contains("minItems") && v.size() < node["minItems"].get<std::size_t>())
            return Failure{ptr, "needs at least " + node["minItems"].dump() + " items"};
        if (node.contains("items"))
            for (std::size_t j = 0; j < v.size(); ++j)
                if (auto f = check(root, node["items"], v[j], ptr + "/" + std::to_string(j))) return f;
    }
    if (v.is_object()) {
        if (node.contains("required"))
            for (const auto& k : node["required"])
                if (!v.contains(k.get<std::string>()))
                    return Failure{ptr, "missing required field \"" + k.get<std::string>() + "\""};
        const json empty = json::object();
        const json& props = node.contains("properties") ? node["properties"] : empty;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (props.contains(it.key())) {
                if (auto f = check(root, props[it.key()], it.value(), child(ptr, it.key()))) return f;
            } else if (node.contains("additionalProperties") && node["additionalProperties"] == false) {
                return Failure{child(ptr, it.key()), "unknown field"};
            }
        }
    }
    if (node.contains("oneOf")) {
        std::vector<Failure> fails;
        int passed = 0;
        for (const auto& alt : node["oneOf"]) {
            if (auto f = check(root, alt, v, ptr)) fails.push_back(*f);
            else ++passed;
        }
        if (passed == 1) return std::nullopt;
        if (passed > 1) return Failure{ptr, "matches more than one alternative"};
        // Report against the alternative whose discriminator matches, when there is one.
        std::vector<std::string> tags;
        for (std::size_t a = 0; a < node["oneOf"].size(); ++a) {
            const json& alt = resolve(root, node["oneOf"][a]);
            if (!alt.contains("properties") || !v.is_object()) continue;
            for (auto it = alt["properties"].begin(); it != alt["properties"].end(); ++it) {
                if (!it.value().contains("const")) continue;
                tags.push_back(it.key() + "=" + it.value()["const"].dump());
                if (v.contains(it.key()) && v[it.key()] == it.value()["const"]) return fails[a];
            }
        }
        std::string msg = "matches none of the allowed forms";
        if (!tags.empty()) {
            msg += " (";
            for (std::size_t j = 0; j < tags.size(); ++j) msg += (j ? ", " : "") + tags[j];
            msg += ")";
        }
        return Failure{ptr, msg};
    }
    return std::nullopt;
}

}  // namespace detail

inline void validate(const json& doc) {
    if (auto f = detail::check(schema(), schema(), doc, "")) throw SchemaError(f->pointer, f->message);
}

// ---- output ----------------------------------------------------------------

inline std::string format_number(double x, int precision = 17) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

// Pretty printer with fixed significant digits; keys come out sorted.
inline void write_json(std::ostream& os, const json& j, int precision = 17, int indent = 0) {
    const std::string pad(indent + 2, ' '), close(indent, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            std::size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                os << pad << json(it.key()).dump() << ": ";
                write_json(os, it.value(), precision, indent + 2);
                os << (k + 1 < j.size() ? ",\n" : "\n");
            }
            os << close << "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                os << pad;
                write_json(os, j[k], precision, indent + 2);
                os << (k + 1 < j.size() ? ",\n" : "\n");
            }
            os << close << "]";
            return;
        }
        case json::value_t::number_float:
            os << format_number(j.get<double>(), precision);
            return;
        default:
            os << j.dump();
    }
}

inline std::string to_text(const json& j, int precision = 17) {
    std::ostringstream os;
    write_json(os, j, precision);
    os << "\n";
    return os.str();
}

// ---- conversions -------------------------------------------------------------

inline GaussianState state_from_json(const json& j, double mass, double hbar) {
    Phase ph;
    if (j.contains("phase") && !j["phase"].is_null()) ph = j["phase"].get<double>();
    return GaussianState(mass, hbar, j.at("x_center").get<double>(), j.at("mean_momentum").get<double>(),
                         j.at("delta_sq").get<double>(), j.at("tw").get<double>(), ph);
}

inline json state_to_json(const GaussianState& s) {
    json j{{"x_center", s.x_center()},
           {"mean_momentum", s.mean_momentum()},
           {"delta_sq", s.delta_sq()},
           {"tw", s.tw()}};
    j["phase"] = s.global_phase() ? json(*s.global_phase()) : json(nullptr);
    return j;
}

// Quantities that follow from the state; kept apart so the state block reloads as is.
inline json derived_to_json(const GaussianState& s) {
    return {{"W_real", s.W().real()},
            {"W_imag", s.W().imag()},
            {"spreading", s.spreading()},
            {"position_sigma", s.position_sigma()},
            {"momentum_sigma", s.momentum_sigma()}};
}

inline TimeFunction time_function_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "constant") return TimeFunction::constant(j.at("value").get<double>());
    if (type == "sinusoid")
        return TimeFunction::sinusoid(j.at("amplitude").get<double>(), j.at("omega").get<double>(),
                                      j.value("phase", 0.0), j.value("offset", 0.0));
    if (type == "tabulated")
        return TimeFunction(TimeFunction::Tabulated{j.at("t").get<std::vector<double>>(),
                                                    j.at("v").get<std::vector<double>>()});
    throw SchemaError("", "unknown time function type " + type);
}

inline PulseSegment segment_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "free") return FreeSegment{j.at("T").get<double>()};
    if (type == "inverse_free") return InverseFreeSegment{j.at("T").get<double>()};
    if (type == "harmonic") return HarmonicSegment{j.at("omega").get<double>(), j.at("T").get<double>()};
    if (type == "inverse_harmonic")
        return InverseHarmonicSegment{j.at("omega").get<double>(), j.at("T_prime").get<double>(), j.value("k", 0L)};
    if (type == "forced_harmonic")
        return ForcedHarmonicSegment{j.at("omega").get<double>(), ForceSpec{time_function_from_json(j.at("force"))},
                                     j.at("T").get<double>()};
    if (type == "quadratic") {
        auto tf = [&](const char* k) {
            return j.contains(k) ? time_function_from_json(j[k]) : TimeFunction::constant(0.0);
        };
        return GeneralQuadraticSegment{{tf("b"), tf("c"), tf("d"), tf("f")}, j.at("T").get<double>()};
    }
    throw SchemaError("", "unknown segment type " + type);
}

// Only the segment kinds the designers emit need a writer.
inline json segment_to_json(const PulseSegment& seg) {
    if (auto s = std::get_if<FreeSegment>(&seg)) return {{"type", "free"}, {"T", s->T}};
    if (auto s = std::get_if<InverseFreeSegment>(&seg)) return {{"type", "inverse_free"}, {"T", s->T}};
    if (auto s = std::get_if<HarmonicSegment>(&seg)) return {{"type", "harmonic"}, {"omega", s->omega}, {"T", s->T}};
    throw DomainError("segment kind has no serialized form");
}

inline trigger::Level level_from_string(const std::string& s) {
    if (s == "g0") return trigger::Level::g0;
    if (s == "g1") return trigger::Level::g1;
    if (s == "e") return trigger::Level::e;
    throw SchemaError("", "unknown level " + s);
}

inline const char* level_name(trigger::Level l) {
    switch (l) {
        case trigger::Level::g0: return "g0";
        case trigger::Level::g1: return "g1";
        default: return "e";
    }
}

}  // namespace gwp::scenario
