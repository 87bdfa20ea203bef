#include "stokeswave/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stokeswave {

std::string format_double(double x) {
    if (std::isnan(x)) return "null";
    if (std::isinf(x)) return x > 0 ? "1e999" : "-1e999";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.v_ = std::make_shared<Obj>();
    return v;
}

JsonValue JsonValue::array() {
    JsonValue v;
    v.v_ = std::make_shared<Arr>();
    return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue val) {
    auto obj = std::get<std::shared_ptr<Obj>>(v_);
    for (auto& [k, v] : obj->items)
        if (k == key) {
            v = std::move(val);
            return *this;
        }
    obj->items.emplace_back(key, std::move(val));
    return *this;
}

JsonValue& JsonValue::push(JsonValue val) {
    std::get<std::shared_ptr<Arr>>(v_)->items.push_back(std::move(val));
    return *this;
}

JsonValue JsonValue::from_doubles(const std::vector<double>& xs) {
    JsonValue a = array();
    for (double x : xs) a.push(x);
    return a;
}

namespace {
std::string escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}
}  // namespace

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
    const std::string pad(indent * (depth + 1), ' ');
    const std::string padc(indent * depth, ' ');
    if (std::holds_alternative<std::nullptr_t>(v_)) {
        out += "null";
    } else if (std::holds_alternative<bool>(v_)) {
        out += std::get<bool>(v_) ? "true" : "false";
    } else if (std::holds_alternative<double>(v_)) {
        out += format_double(std::get<double>(v_));
    } else if (std::holds_alternative<std::string>(v_)) {
        out += escape(std::get<std::string>(v_));
    } else if (std::holds_alternative<std::shared_ptr<Obj>>(v_)) {
        const auto& items = std::get<std::shared_ptr<Obj>>(v_)->items;
        if (items.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        for (size_t i = 0; i < items.size(); ++i) {
            out += pad + escape(items[i].first) + ": ";
            items[i].second.dump_to(out, indent, depth + 1);
            if (i + 1 < items.size()) out += ',';
            out += '\n';
        }
        out += padc + "}";
    } else {
        const auto& items = std::get<std::shared_ptr<Arr>>(v_)->items;
        if (items.empty()) {
            out += "[]";
            return;
        }
        out += "[";
        for (size_t i = 0; i < items.size(); ++i) {
            items[i].dump_to(out, indent, depth + 1);
            if (i + 1 < items.size()) out += ", ";
        }
        out += "]";
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    out += '\n';
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
}

CsvWriter::CsvWriter(std::vector<std::string> columns, std::string config_echo)
    : columns_(std::move(columns)), config_echo_(std::move(config_echo)) {}

void CsvWriter::add_row(const std::vector<double>& row) { rows_.push_back(row); }

std::string CsvWriter::str() const {
    std::string out;
    out += std::string("# format = ") + kFormatVersion + "\n";
    for (size_t pos = 0, next = 0; pos < config_echo_.size(); pos = next + 1) {
        next = config_echo_.find('\n', pos);
        if (next == std::string::npos) next = config_echo_.size();
        out += "# " + config_echo_.substr(pos, next - pos) + "\n";
        if (next >= config_echo_.size()) break;
    }
    for (size_t i = 0; i < columns_.size(); ++i) {
        out += columns_[i];
        if (i + 1 < columns_.size()) out += ',';
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            out += format_double(row[i]);
            if (i + 1 < row.size()) out += ',';
        }
        out += '\n';
    }
    return out;
}

}  // namespace stokeswave
