// SPDX-License-Identifier: Apache-2.0
//
// locache  Location-dependent coded caching with multi-antenna beamforming
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef LOCACHE_CONFIG_HPP
#define LOCACHE_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "locache/common.hpp"

namespace locache {

// Key/value configuration in a TOML-like subset: [section] headers,
// key = value lines, # comments. Values are booleans, numbers, quoted
// strings, or flat arrays of those. Every key must be consumed by the
// reader; leftovers are reported as errors so typos cannot silently
// fall back to defaults.
class ConfigFile {
  public:
    struct Value {
        enum class Kind { boolean, number, text, list };
        Kind kind = Kind::number;
        bool b = false;
        double num = 0;
        std::string str;
        std::vector<Value> items;
        int line = 0;
    };

    static ConfigFile parse_string(const std::string &text) {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = strip_comment(line);
            if (t.empty())
                continue;
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw config_error(where(line_no) + "malformed section header: " + t);
                section = t.substr(1, t.size() - 2);
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error(where(line_no) + "expected key = value: " + t);
            const std::string key = trim(t.substr(0, eq));
            const std::string raw = trim(t.substr(eq + 1));
            if (key.empty() || raw.empty())
                throw config_error(where(line_no) + "empty key or value: " + t);
            if (cfg.values_[section].count(key) > 0)
                throw config_error(where(line_no) + "duplicate key: " + qualified(section, key));
            std::size_t pos = 0;
            Value v = parse_value(raw, pos, line_no);
            if (pos != raw.size())
                throw config_error(where(line_no) + "trailing characters after value: " + raw);
            v.line = line_no;
            cfg.values_[section][key] = std::move(v);
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::string &path) {
        std::ifstream in(path);
        if (!in)
            throw config_error("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    bool has(const std::string &section, const std::string &key) const {
        const auto sec = values_.find(section);
        return sec != values_.end() && sec->second.count(key) > 0;
    }

    bool is_string(const std::string &section, const std::string &key) const {
        const auto sec = values_.find(section);
        if (sec == values_.end())
            return false;
        const auto it = sec->second.find(key);
        return it != sec->second.end() && it->second.kind == Value::Kind::text;
    }

    double get_double(const std::string &section, const std::string &key) {
        const Value &v = fetch(section, key);
        if (v.kind != Value::Kind::number)
            throw config_error(qualified(section, key) + " must be a number");
        return v.num;
    }

    double get_double_or(const std::string &section, const std::string &key, double fallback) {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    int get_int(const std::string &section, const std::string &key) {
        const double d = get_double(section, key);
        if (std::abs(d - std::round(d)) > 1e-9)
            throw config_error(qualified(section, key) + " must be an integer");
        return static_cast<int>(std::llround(d));
    }

    int get_int_or(const std::string &section, const std::string &key, int fallback) {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::uint64_t get_u64(const std::string &section, const std::string &key) {
        const double d = get_double(section, key);
        if (d < 0 || std::abs(d - std::round(d)) > 1e-9)
            throw config_error(qualified(section, key) + " must be a nonnegative integer");
        return static_cast<std::uint64_t>(std::llround(d));
    }

    std::uint64_t get_u64_or(const std::string &section, const std::string &key,
                             std::uint64_t fallback) {
        return has(section, key) ? get_u64(section, key) : fallback;
    }

    bool get_bool(const std::string &section, const std::string &key) {
        const Value &v = fetch(section, key);
        if (v.kind != Value::Kind::boolean)
            throw config_error(qualified(section, key) + " must be true or false");
        return v.b;
    }

    bool get_bool_or(const std::string &section, const std::string &key, bool fallback) {
        return has(section, key) ? get_bool(section, key) : fallback;
    }

    std::string get_string(const std::string &section, const std::string &key) {
        const Value &v = fetch(section, key);
        if (v.kind != Value::Kind::text)
            throw config_error(qualified(section, key) + " must be a quoted string");
        return v.str;
    }

    std::string get_string_or(const std::string &section, const std::string &key,
                              const std::string &fallback) {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    std::vector<double> get_double_list(const std::string &section, const std::string &key) {
        const Value &v = fetch(section, key);
        if (v.kind != Value::Kind::list)
            throw config_error(qualified(section, key) + " must be an array");
        std::vector<double> out;
        for (const Value &item : v.items) {
            if (item.kind != Value::Kind::number)
                throw config_error(qualified(section, key) + " must contain only numbers");
            out.push_back(item.num);
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string &section, const std::string &key) {
        const Value &v = fetch(section, key);
        if (v.kind != Value::Kind::list)
            throw config_error(qualified(section, key) + " must be an array");
        std::vector<std::string> out;
        for (const Value &item : v.items) {
            if (item.kind != Value::Kind::text)
                throw config_error(qualified(section, key) + " must contain only strings");
            out.push_back(item.str);
        }
        return out;
    }

    // Rejects every key no reader asked for. Called once after all
    // sections have been decoded.
    void require_consumed() const {
        std::vector<std::string> leftover;
        for (const auto &[section, keys] : values_)
            for (const auto &[key, value] : keys)
                if (consumed_.count(qualified(section, key)) == 0)
                    leftover.push_back(qualified(section, key) + " (line " +
                                       std::to_string(value.line) + ")");
        if (!leftover.empty()) {
            std::string msg = "unknown config keys:";
            for (const std::string &k : leftover)
                msg += " " + k;
            throw config_error(msg);
        }
    }

    // Canonical one-line-per-key dump of everything that was parsed,
    // used in output provenance headers.
    std::string resolved() const {
        std::ostringstream out;
        for (const auto &[section, keys] : values_)
            for (const auto &[key, value] : keys)
                out << qualified(section, key) << " = " << render(value) << "\n";
        return out.str();
    }

  private:
    static std::string where(int line) { return "config line " + std::to_string(line) + ": "; }

    static std::string qualified(const std::string &section, const std::string &key) {
        return section.empty() ? key : section + "." + key;
    }

    static std::string trim(const std::string &s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos)
            return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    // Removes a trailing comment, honoring quotes.
    static std::string strip_comment(const std::string &line) {
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                in_quote = !in_quote;
            else if (line[i] == '#' && !in_quote)
                return trim(line.substr(0, i));
        }
        return trim(line);
    }

    static void skip_ws(const std::string &s, std::size_t &pos) {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
            ++pos;
    }

    static Value parse_value(const std::string &s, std::size_t &pos, int line_no) {
        skip_ws(s, pos);
        if (pos >= s.size())
            throw config_error(where(line_no) + "missing value");
        Value v;
        if (s[pos] == '"') {
            const auto close = s.find('"', pos + 1);
            if (close == std::string::npos)
                throw config_error(where(line_no) + "unterminated string");
            v.kind = Value::Kind::text;
            v.str = s.substr(pos + 1, close - pos - 1);
            pos = close + 1;
        } else if (s[pos] == '[') {
            v.kind = Value::Kind::list;
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == ']') {
                ++pos;
            } else {
                while (true) {
                    v.items.push_back(parse_value(s, pos, line_no));
                    skip_ws(s, pos);
                    if (pos < s.size() && s[pos] == ',') {
                        ++pos;
                        continue;
                    }
                    if (pos < s.size() && s[pos] == ']') {
                        ++pos;
                        break;
                    }
                    throw config_error(where(line_no) + "expected , or ] in array");
                }
            }
        } else if (s.compare(pos, 4, "true") == 0) {
            v.kind = Value::Kind::boolean;
            v.b = true;
            pos += 4;
        } else if (s.compare(pos, 5, "false") == 0) {
            v.kind = Value::Kind::boolean;
            v.b = false;
            pos += 5;
        } else {
            std::size_t end = pos;
            while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != ' ' &&
                   s[end] != '\t')
                ++end;
            const std::string tok = s.substr(pos, end - pos);
            std::size_t used = 0;
            try {
                v.num = std::stod(tok, &used);
            } catch (const std::exception &) {
                throw config_error(where(line_no) + "not a number: " + tok);
            }
            if (used != tok.size())
                throw config_error(where(line_no) + "not a number: " + tok);
            v.kind = Value::Kind::number;
            pos = end;
        }
        skip_ws(s, pos);
        return v;
    }

    static std::string render(const Value &v) {
        switch (v.kind) {
        case Value::Kind::boolean:
            return v.b ? "true" : "false";
        case Value::Kind::text:
            return "\"" + v.str + "\"";
        case Value::Kind::number: {
            std::ostringstream out;
            out.precision(17);
            out << v.num;
            return out.str();
        }
        case Value::Kind::list: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) {
                if (i > 0)
                    out += ", ";
                out += render(v.items[i]);
            }
            return out + "]";
        }
        }
        return "?";
    }

    const Value &fetch(const std::string &section, const std::string &key) {
        const auto sec = values_.find(section);
        if (sec == values_.end() || sec->second.count(key) == 0)
            throw config_error("missing config key: " + qualified(section, key));
        consumed_.insert(qualified(section, key));
        return sec->second.at(key);
    }

    std::map<std::string, std::map<std::string, Value>> values_;
    std::set<std::string> consumed_;
};

} // namespace locache

#endif
