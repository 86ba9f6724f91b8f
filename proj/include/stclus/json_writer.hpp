#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stclus/csv.hpp"

namespace stclus {

/// Minimal ordered JSON value for the pipeline's output files. Hand-rolled
/// so floating-point fields serialize with %.17g and object keys keep
/// insertion order, which keeps outputs byte-stable across runs.
class JsonValue {
public:
    using Array = std::vector<JsonValue>;
    using Object = std::vector<std::pair<std::string, JsonValue>>;

    JsonValue() : data_(nullptr) {}
    JsonValue(std::nullptr_t) : data_(nullptr) {}
    JsonValue(bool b) : data_(b) {}
    JsonValue(int v) : data_(static_cast<std::int64_t>(v)) {}
    JsonValue(std::int64_t v) : data_(v) {}
    JsonValue(std::size_t v) : data_(static_cast<std::int64_t>(v)) {}
    JsonValue(double v) : data_(v) {}
    JsonValue(const char* s) : data_(std::string(s)) {}
    JsonValue(std::string s) : data_(std::move(s)) {}
    JsonValue(Array a) : data_(std::move(a)) {}
    JsonValue(Object o) : data_(std::move(o)) {}

    static JsonValue array() { return JsonValue(Array{}); }
    static JsonValue object() { return JsonValue(Object{}); }

    JsonValue& push_back(JsonValue v) {
        std::get<Array>(data_).push_back(std::move(v));
        return *this;
    }
    JsonValue& set(std::string key, JsonValue v) {
        std::get<Object>(data_).emplace_back(std::move(key), std::move(v));
        return *this;
    }

    void dump(std::string& out) const {
        switch (data_.index()) {
            case 0:
                out += "null";
                break;
            case 1:
                out += std::get<bool>(data_) ? "true" : "false";
                break;
            case 2:
                out += std::to_string(std::get<std::int64_t>(data_));
                break;
            case 3:
                out += format_double(std::get<double>(data_));
                break;
            case 4:
                dump_string(std::get<std::string>(data_), out);
                break;
            case 5: {
                out += '[';
                const auto& arr = std::get<Array>(data_);
                for (std::size_t i = 0; i < arr.size(); ++i) {
                    if (i) out += ',';
                    arr[i].dump(out);
                }
                out += ']';
                break;
            }
            case 6: {
                out += '{';
                const auto& obj = std::get<Object>(data_);
                for (std::size_t i = 0; i < obj.size(); ++i) {
                    if (i) out += ',';
                    dump_string(obj[i].first, out);
                    out += ':';
                    obj[i].second.dump(out);
                }
                out += '}';
                break;
            }
        }
    }

    std::string dump() const {
        std::string out;
        dump(out);
        return out;
    }

private:
    static void dump_string(const std::string& s, std::string& out) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"':
                    out += "\\\"";
                    break;
                case '\\':
                    out += "\\\\";
                    break;
                case '\n':
                    out += "\\n";
                    break;
                case '\t':
                    out += "\\t";
                    break;
                case '\r':
                    out += "\\r";
                    break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> data_;
};

}  // namespace stclus
