#include "alloyopt/element_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "alloyopt/composition.hpp"
#include "alloyopt/error.hpp"
#include "alloyopt/text_io.hpp"

namespace alloyopt {
namespace {

constexpr std::array<std::string_view, 118> kSymbols = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar",
    "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe",
    "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

constexpr double kLoadSumTolerance = 1e-6;

void check_elements(const std::vector<std::string>& elements, const std::string& where) {
    std::unordered_set<std::string> seen;
    for (const auto& e : elements) {
        if (!is_element_symbol(e)) throw InvalidArgument(where + ": unknown element symbol '" + e + "'");
        if (!seen.insert(e).second) throw InvalidArgument(where + ": duplicate element '" + e + "'");
    }
}

}  // namespace

bool is_element_symbol(std::string_view symbol) {
    return std::find(kSymbols.begin(), kSymbols.end(), symbol) != kSymbols.end();
}

// ---------------------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::vector<std::string> elements, Eigen::MatrixXd values, std::string source_label)
    : elements_(std::move(elements)), values_(std::move(values)), source_label_(std::move(source_label)) {
    if (values_.cols() < 1) throw InvalidArgument("embedding table: dimension must be at least 1");
    if (static_cast<std::size_t>(values_.rows()) != elements_.size())
        throw InvalidArgument("embedding table: row count does not match element count");
    check_elements(elements_, "embedding table");
    if (!values_.allFinite()) throw InvalidArgument("embedding table: non-finite value");
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view symbol) const {
    const auto it = std::find(elements_.begin(), elements_.end(), symbol);
    if (it == elements_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - elements_.begin());
}

std::string EmbeddingTable::to_csv() const {
    const std::size_t d = dim();
    std::string out = "element";
    for (std::size_t j = 0; j < d; ++j) out += ",e" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        out += elements_[i];
        for (std::size_t j = 0; j < d; ++j) {
            out += ',';
            if (!cell_text_.empty())
                out += cell_text_[i * d + j];
            else
                out += io::format_double(values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        out += '\n';
    }
    return out;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::string source_label) {
    const std::string name = path.string();
    if (!std::filesystem::exists(path)) throw ParseError(name, 0, "file not found");
    auto lines = io::read_lines(path);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(name, 1, "missing header");

    const auto header = io::split_csv(lines[0]);
    if (header.size() < 2 || header[0] != "element")
        throw ParseError(name, 1, "malformed header: expected element,e0,e1,...");
    const std::size_t dim = header.size() - 1;
    for (std::size_t j = 0; j < dim; ++j) {
        if (header[j + 1] != "e" + std::to_string(j))
            throw ParseError(name, 1, "malformed header: column " + std::to_string(j + 2) + " should be e" +
                                          std::to_string(j));
    }

    std::vector<std::string> elements;
    std::vector<std::string> cells;
    std::vector<double> flat;
    std::set<std::string, std::less<>> seen;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        const auto row = io::split_csv(lines[ln]);
        if (row.size() != dim + 1)
            throw ParseError(name, line_no,
                             "dimension mismatch: expected " + std::to_string(dim) + " values, found " +
                                 std::to_string(row.size() - 1));
        std::string symbol(row[0]);
        if (symbol.empty()) throw ParseError(name, line_no, "empty element symbol");
        if (!is_element_symbol(symbol)) throw ParseError(name, line_no, "unknown element symbol '" + symbol + "'");
        if (!seen.insert(symbol).second) throw ParseError(name, line_no, "duplicate element '" + symbol + "'");
        for (std::size_t j = 1; j <= dim; ++j) {
            double v = 0.0;
            if (!io::parse_double(row[j], v))
                throw ParseError(name, line_no,
                                 "non-numeric value '" + std::string(row[j]) + "' in column e" + std::to_string(j - 1));
            flat.push_back(v);
            cells.emplace_back(row[j]);
        }
        elements.push_back(std::move(symbol));
    }
    if (elements.empty()) throw ParseError(name, 2, "table has no rows");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(elements.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < elements.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * dim + j];

    if (source_label.empty()) source_label = path.stem().string();
    EmbeddingTable table(std::move(elements), std::move(values), std::move(source_label));
    table.cell_text_ = std::move(cells);
    return table;
}

void write_embedding_table(const std::filesystem::path& path, const EmbeddingTable& table) {
    io::write_file_atomic(path, table.to_csv());
}

// ---------------------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<std::string> elements, std::vector<std::string> property_names,
                 std::vector<DatasetRow> rows, bool has_class)
    : elements_(std::move(elements)),
      property_names_(std::move(property_names)),
      rows_(std::move(rows)),
      has_class_(has_class) {
    if (elements_.empty()) throw InvalidArgument("dataset: no element columns");
    check_elements(elements_, "dataset");
    std::set<std::string> names;
    for (const auto& p : property_names_) {
        if (p.empty()) throw InvalidArgument("dataset: empty property name");
        if (!names.insert(p).second) throw InvalidArgument("dataset: duplicate property '" + p + "'");
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        auto& row = rows_[r];
        const std::string where = "dataset row " + std::to_string(r);
        if (row.fractions.size() != elements_.size()) throw InvalidArgument(where + ": wrong number of fractions");
        if (row.properties.size() != property_names_.size())
            throw InvalidArgument(where + ": wrong number of properties");
        double sum = 0.0;
        for (double f : row.fractions) {
            if (!std::isfinite(f) || f < 0.0 || f > 1.0) throw InvalidArgument(where + ": fraction outside [0, 1]");
            sum += f;
        }
        if (std::abs(sum - 1.0) > kLoadSumTolerance) throw InvalidArgument(where + ": fractions do not sum to 1");
        rescale_to_unit_sum(row.fractions);
        for (double v : row.properties)
            if (!std::isfinite(v)) throw InvalidArgument(where + ": non-finite property value");
    }
}

std::optional<std::size_t> Dataset::property_index(std::string_view name) const {
    const auto it = std::find(property_names_.begin(), property_names_.end(), name);
    if (it == property_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - property_names_.begin());
}

std::vector<double> Dataset::property(std::string_view name) const {
    const auto idx = property_index(name);
    if (!idx) throw InvalidArgument("dataset has no property '" + std::string(name) + "'");
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.properties[*idx]);
    return out;
}

std::vector<std::string> Dataset::labels() const {
    std::vector<std::string> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.label.value_or(std::string()));
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
    std::vector<DatasetRow> rows;
    rows.reserve(row_indices.size());
    for (auto i : row_indices) rows.push_back(rows_.at(i));
    return Dataset(elements_, property_names_, std::move(rows), has_class_);
}

std::string Dataset::to_csv() const {
    std::ostringstream out;
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    for (const auto& e : elements_) sep(), out << "element:" << e;
    for (const auto& p : property_names_) sep(), out << "prop:" << p;
    if (has_class_) sep(), out << "class";
    out << '\n';
    for (const auto& r : rows_) {
        first = true;
        for (double f : r.fractions) sep(), out << io::format_double(f);
        for (double v : r.properties) sep(), out << io::format_double(v);
        if (has_class_) sep(), out << r.label.value_or(std::string());
        out << '\n';
    }
    return out.str();
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::vector<std::string>> expected_elements) {
    const std::string name = path.string();
    if (!std::filesystem::exists(path)) throw ParseError(name, 0, "file not found");
    auto lines = io::read_lines(path);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(name, 1, "missing header");

    enum class Kind { element, property, label };
    std::vector<Kind> kinds;
    std::vector<std::string> elements, properties;
    bool has_class = false;
    for (auto cell : io::split_csv(lines[0])) {
        if (cell.starts_with("element:")) {
            std::string sym(cell.substr(8));
            if (!is_element_symbol(sym)) throw ParseError(name, 1, "schema mismatch: unknown element '" + sym + "'");
            if (std::find(elements.begin(), elements.end(), sym) != elements.end())
                throw ParseError(name, 1, "schema mismatch: duplicate element column '" + sym + "'");
            kinds.push_back(Kind::element);
            elements.push_back(std::move(sym));
        } else if (cell.starts_with("prop:")) {
            std::string prop(cell.substr(5));
            if (prop.empty()) throw ParseError(name, 1, "schema mismatch: empty property name");
            if (std::find(properties.begin(), properties.end(), prop) != properties.end())
                throw ParseError(name, 1, "schema mismatch: duplicate property column '" + prop + "'");
            kinds.push_back(Kind::property);
            properties.push_back(std::move(prop));
        } else if (cell == "class") {
            if (has_class) throw ParseError(name, 1, "schema mismatch: more than one class column");
            kinds.push_back(Kind::label);
            has_class = true;
        } else {
            throw ParseError(name, 1, "schema mismatch: unrecognized column '" + std::string(cell) + "'");
        }
    }
    if (elements.empty()) throw ParseError(name, 1, "schema mismatch: no element:<Symbol> columns");
    if (expected_elements && *expected_elements != elements) {
        std::string want, got;
        for (const auto& e : *expected_elements) want += (want.empty() ? "" : ",") + e;
        for (const auto& e : elements) got += (got.empty() ? "" : ",") + e;
        throw ParseError(name, 1, "schema mismatch: expected elements (" + want + "), file has (" + got + ")");
    }

    std::vector<DatasetRow> rows;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        const auto cells = io::split_csv(lines[ln]);
        if (cells.size() != kinds.size())
            throw ParseError(name, line_no,
                             "expected " + std::to_string(kinds.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        DatasetRow row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (kinds[c] == Kind::label) {
                if (!cells[c].empty()) row.label = std::string(cells[c]);
                continue;
            }
            if (cells[c].empty())
                throw ParseError(name, line_no,
                                 kinds[c] == Kind::property ? "missing property cell" : "missing fraction cell");
            double v = 0.0;
            if (!io::parse_double(cells[c], v))
                throw ParseError(name, line_no, "non-numeric value '" + std::string(cells[c]) + "'");
            if (kinds[c] == Kind::element) {
                if (v < 0.0) throw ParseError(name, line_no, "negative fraction");
                if (v > 1.0) throw ParseError(name, line_no, "fraction greater than 1");
                row.fractions.push_back(v);
            } else {
                row.properties.push_back(v);
            }
        }
        double sum = 0.0;
        for (double f : row.fractions) sum += f;
        if (std::abs(sum - 1.0) > kLoadSumTolerance)
            throw ParseError(name, line_no, "simplex-sum violation: fractions sum to " + io::format_double(sum));
        rows.push_back(std::move(row));
    }
    return Dataset(std::move(elements), std::move(properties), std::move(rows), has_class);
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    io::write_file_atomic(path, dataset.to_csv());
}

}  // namespace alloyopt
