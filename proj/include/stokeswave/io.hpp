#pragma once

// Result serialization: JSON ("stokeswave/1", floats at 17 significant
// digits) and plot-ready CSV. Writing is deterministic: insertion-ordered
// keys, fixed float formatting.

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stokeswave {

inline constexpr const char* kFormatVersion = "stokeswave/1";

class JsonValue {
  public:
    JsonValue() : v_(nullptr) {}
    JsonValue(std::nullptr_t) : v_(nullptr) {}
    JsonValue(bool b) : v_(b) {}
    JsonValue(int i) : v_(static_cast<double>(i)) {}
    JsonValue(double d) : v_(d) {}
    JsonValue(const char* s) : v_(std::string(s)) {}
    JsonValue(std::string s) : v_(std::move(s)) {}

    static JsonValue object();
    static JsonValue array();

    JsonValue& set(const std::string& key, JsonValue val);  // object
    JsonValue& push(JsonValue val);                         // array
    static JsonValue from_doubles(const std::vector<double>& xs);

    std::string dump(int indent = 2) const;

  private:
    struct Obj {
        std::vector<std::pair<std::string, JsonValue>> items;
    };
    struct Arr {
        std::vector<JsonValue> items;
    };
    std::variant<std::nullptr_t, bool, double, std::string, std::shared_ptr<Obj>,
                 std::shared_ptr<Arr>>
        v_;
    void dump_to(std::string& out, int indent, int depth) const;
};

std::string format_double(double x);  // %.17g

void write_text_file(const std::string& path, const std::string& content);

// CSV with '#'-prefixed header lines carrying the format version and the
// resolved config, then the column header row.
class CsvWriter {
  public:
    CsvWriter(std::vector<std::string> columns, std::string config_echo);
    void add_row(const std::vector<double>& row);
    std::string str() const;

  private:
    std::vector<std::string> columns_;
    std::string config_echo_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace stokeswave
