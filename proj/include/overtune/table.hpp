#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "overtune/text.hpp"

namespace overtune {

// Small column-table abstraction so every CLI output can be emitted as
// CSV or JSON with identical numeric content.
class Table {
public:
    using Cell = std::variant<std::string, double, long long, std::monostate>;

    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size()) {
            throw std::invalid_argument("row width mismatch");
        }
        rows_.push_back(std::move(row));
    }

    void write_csv(std::ostream& out) const {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            out << (c ? "," : "") << columns_[c];
        }
        out << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, std::string>) out << v;
                        else if constexpr (std::is_same_v<T, double>) out << fmt_double(v);
                        else if constexpr (std::is_same_v<T, long long>) out << v;
                        // monostate: empty cell
                    },
                    row[c]);
            }
            out << "\n";
        }
    }

    void write_json(std::ostream& out) const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& row : rows_) {
            nlohmann::json obj = nlohmann::json::object();
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, std::monostate>) {
                            obj[columns_[c]] = nullptr;
                        } else {
                            obj[columns_[c]] = v;
                        }
                    },
                    row[c]);
            }
            arr.push_back(std::move(obj));
        }
        out << arr.dump(2) << "\n";
    }

    // Writes <dir>/<name>.csv or .json depending on format.
    void write(const std::string& dir, const std::string& name, bool json) const {
        const std::string path = dir + "/" + name + (json ? ".json" : ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot open output: " + path);
        }
        if (json) write_json(out);
        else write_csv(out);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace overtune
