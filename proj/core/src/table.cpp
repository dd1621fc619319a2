#include "biasaudit/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "biasaudit/errors.hpp"
#include "biasaudit/seeding.hpp"

namespace biasaudit {

namespace {

std::string trim(std::string_view s)
{
    auto const* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string const& value)
{
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

// RFC 4180-ish: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(std::string const& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::optional<double> parse_real(std::string const& cell)
{
    if (cell.empty()) {
        return std::nullopt;
    }
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<int> parse_sex(std::string const& cell)
{
    if (cell == "M" || cell == "m" || cell == "1") {
        return 1;
    }
    if (cell == "F" || cell == "f" || cell == "0") {
        return 0;
    }
    return std::nullopt;
}

bool has_prefix(std::string const& name, std::vector<std::string> const& prefixes)
{
    return std::any_of(prefixes.begin(), prefixes.end(),
        [&](auto const& p) { return name.rfind(p, 0) == 0; });
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out += '"';
    return out;
}

} // namespace

SchemaConfig SchemaConfig::from_key_values(std::map<std::string, std::string> const& kv)
{
    SchemaConfig s;
    for (auto const& [key, value] : kv) {
        if (key == "id_column") {
            s.id_column = value;
        } else if (key == "dataset_column") {
            s.dataset_column = value;
        } else if (key == "age_column") {
            s.age_column = value;
        } else if (key == "sex_column") {
            s.sex_column = value;
        } else if (key == "diagnosis_column") {
            s.diagnosis_column = value;
        } else if (key == "control_values") {
            s.control_values = split_list(value);
        } else if (key == "feature_prefixes") {
            s.feature_prefixes = split_list(value);
        } else if (key == "covariate_columns") {
            s.covariate_columns = split_list(value);
        } else {
            throw SchemaError("unknown schema key '" + key + "'");
        }
    }
    return s;
}

std::map<std::string, std::string> parse_key_values(std::string const& text)
{
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        auto key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) {
            throw SchemaError("config line " + std::to_string(lineno) + ": empty key");
        }
        kv[key] = trim(std::string_view(t).substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_key_value_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot read config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

Table::Table(std::vector<std::string> ids,
    std::vector<std::string> datasets,
    std::vector<double> ages,
    std::vector<int> sexes,
    std::vector<std::string> feature_names,
    Eigen::MatrixXd features,
    std::optional<std::vector<std::string>> diagnoses,
    std::vector<bool> control)
    : ids_(std::move(ids))
    , datasets_(std::move(datasets))
    , ages_(std::move(ages))
    , sexes_(std::move(sexes))
    , diagnoses_(std::move(diagnoses))
    , control_(std::move(control))
    , feature_names_(std::move(feature_names))
    , features_(std::move(features))
{
    auto const n = ids_.size();
    if (datasets_.size() != n || ages_.size() != n || sexes_.size() != n
        || static_cast<std::size_t>(features_.rows()) != n
        || static_cast<std::size_t>(features_.cols()) != feature_names_.size()
        || (diagnoses_ && diagnoses_->size() != n)) {
        throw DimensionError("table columns have inconsistent lengths");
    }
    if (control_.empty()) {
        control_.assign(n, true);
    } else if (control_.size() != n) {
        throw DimensionError("control flags length mismatch");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen.insert(ids_[i]).second) {
            throw SchemaError("duplicate subject id '" + ids_[i] + "'");
        }
        if (!std::isfinite(ages_[i]) || ages_[i] <= 0.0) {
            throw SchemaError("subject '" + ids_[i] + "' has invalid age");
        }
        if (sexes_[i] != 0 && sexes_[i] != 1) {
            throw SchemaError("subject '" + ids_[i] + "' has invalid sex code");
        }
    }
    if (!features_.allFinite()) {
        throw SchemaError("feature values must be finite");
    }
    std::unordered_set<std::string> names;
    for (auto const& f : feature_names_) {
        if (f == "age" || f == "sex" || !names.insert(f).second) {
            throw SchemaError("duplicate or reserved feature column '" + f + "'");
        }
    }
}

Subject Table::subject(std::size_t row) const
{
    return Subject{ids_[row], datasets_[row], ages_[row], sexes_[row], control_[row],
        features_.row(static_cast<Eigen::Index>(row)).transpose()};
}

std::vector<std::string> Table::distinct_datasets() const
{
    std::set<std::string> s(datasets_.begin(), datasets_.end());
    return {s.begin(), s.end()};
}

bool Table::has_column(std::string const& name) const
{
    return name == "age" || name == "sex"
        || std::find(feature_names_.begin(), feature_names_.end(), name) != feature_names_.end();
}

Eigen::VectorXd Table::column(std::string const& name) const
{
    auto const n = static_cast<Eigen::Index>(rows());
    if (name == "age") {
        return Eigen::Map<Eigen::VectorXd const>(ages_.data(), n);
    }
    if (name == "sex") {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = sexes_[static_cast<std::size_t>(i)];
        }
        return v;
    }
    auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
    if (it == feature_names_.end()) {
        throw SchemaError("no column named '" + name + "'");
    }
    return features_.col(it - feature_names_.begin());
}

Eigen::MatrixXd Table::columns(std::vector<std::string> const& names) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = column(names[j]);
    }
    return out;
}

Table Table::subset(std::span<std::size_t const> rows) const
{
    std::vector<std::string> ids, ds;
    std::vector<double> ages;
    std::vector<int> sexes;
    std::vector<bool> control;
    std::optional<std::vector<std::string>> diag;
    if (diagnoses_) {
        diag.emplace();
    }
    Eigen::MatrixXd feats(static_cast<Eigen::Index>(rows.size()), features_.cols());
    Eigen::Index out = 0;
    for (auto r : rows) {
        if (r >= this->rows()) {
            throw DimensionError("subset row index out of range");
        }
        ids.push_back(ids_[r]);
        ds.push_back(datasets_[r]);
        ages.push_back(ages_[r]);
        sexes.push_back(sexes_[r]);
        control.push_back(control_[r]);
        if (diag) {
            diag->push_back((*diagnoses_)[r]);
        }
        feats.row(out++) = features_.row(static_cast<Eigen::Index>(r));
    }
    return Table(std::move(ids), std::move(ds), std::move(ages), std::move(sexes), feature_names_,
        std::move(feats), std::move(diag), std::move(control));
}

Table Table::controls_only() const
{
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (control_[i]) {
            keep.push_back(i);
        }
    }
    return subset(keep);
}

Table Table::only_dataset(std::string const& label) const
{
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (datasets_[i] == label) {
            keep.push_back(i);
        }
    }
    return subset(keep);
}

Table Table::concat(Table const& a, Table const& b)
{
    if (a.empty()) {
        return b;
    }
    if (b.empty()) {
        return a;
    }
    if (a.feature_names_ != b.feature_names_) {
        throw SchemaError("cannot concatenate tables with different feature columns");
    }
    auto cat = [](auto x, auto const& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    std::optional<std::vector<std::string>> diag;
    if (a.diagnoses_ || b.diagnoses_) {
        auto fill = [](Table const& t) {
            return t.diagnoses_ ? *t.diagnoses_ : std::vector<std::string>(t.rows(), "CN");
        };
        diag = cat(fill(a), fill(b));
    }
    Eigen::MatrixXd feats(a.features_.rows() + b.features_.rows(), a.features_.cols());
    feats << a.features_, b.features_;
    return Table(cat(a.ids_, b.ids_), cat(a.datasets_, b.datasets_), cat(a.ages_, b.ages_),
        cat(a.sexes_, b.sexes_), a.feature_names_, std::move(feats), std::move(diag),
        cat(a.control_, b.control_));
}

LoadResult parse_csv(std::string const& text, SchemaConfig const& schema)
{
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("missing header row");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    auto header = split_csv_line(line);

    auto find_col = [&](std::string const& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require_col = [&](std::string const& name) {
        auto c = find_col(name);
        if (!c) {
            throw SchemaError("missing required column '" + name + "'");
        }
        return *c;
    };
    auto const id_col = require_col(schema.id_column);
    auto const ds_col = require_col(schema.dataset_column);
    auto const age_col = require_col(schema.age_column);
    auto const sex_col = require_col(schema.sex_column);
    auto const dx_col = find_col(schema.diagnosis_column);

    std::vector<std::size_t> feat_cols;
    std::vector<std::string> feat_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto const& h = header[c];
        bool is_covariate = std::find(schema.covariate_columns.begin(), schema.covariate_columns.end(), h)
            != schema.covariate_columns.end();
        if (c == id_col || c == ds_col || c == age_col || c == sex_col || (dx_col && c == *dx_col)) {
            continue;
        }
        if (is_covariate || has_prefix(h, schema.feature_prefixes)) {
            feat_cols.push_back(c);
            feat_names.push_back(h);
        }
    }
    for (auto const& cov : schema.covariate_columns) {
        require_col(cov);
    }
    if (feat_cols.empty()) {
        throw SchemaError("no feature columns match the configured prefixes");
    }

    std::vector<std::string> ids, ds, diag;
    std::vector<double> ages;
    std::vector<int> sexes;
    std::vector<bool> control;
    std::vector<double> feat_values;
    std::vector<RejectedRow> rejected;
    std::unordered_set<std::string> seen_ids;

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        auto reject = [&](std::string reason) {
            std::string id = id_col < fields.size() ? fields[id_col] : std::string{};
            rejected.push_back({lineno, std::move(id), std::move(reason)});
        };
        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
            continue;
        }
        auto const& id = fields[id_col];
        if (id.empty()) {
            reject("empty subject id");
            continue;
        }
        if (seen_ids.count(id) != 0) {
            reject("duplicate subject id");
            continue;
        }
        if (fields[ds_col].empty()) {
            reject("empty dataset label");
            continue;
        }
        auto age = parse_real(fields[age_col]);
        if (!age || *age <= 0.0) {
            reject("invalid age '" + fields[age_col] + "'");
            continue;
        }
        auto sex = parse_sex(fields[sex_col]);
        if (!sex) {
            reject("invalid sex '" + fields[sex_col] + "'");
            continue;
        }
        std::vector<double> row;
        row.reserve(feat_cols.size());
        bool ok = true;
        for (std::size_t j = 0; j < feat_cols.size(); ++j) {
            auto v = parse_real(fields[feat_cols[j]]);
            if (!v) {
                reject("non-numeric value in column '" + feat_names[j] + "'");
                ok = false;
                break;
            }
            row.push_back(*v);
        }
        if (!ok) {
            continue;
        }
        seen_ids.insert(id);
        ids.push_back(id);
        ds.push_back(fields[ds_col]);
        ages.push_back(*age);
        sexes.push_back(*sex);
        if (dx_col) {
            auto const& dx = fields[*dx_col];
            diag.push_back(dx);
            control.push_back(std::find(schema.control_values.begin(), schema.control_values.end(), dx)
                != schema.control_values.end());
        } else {
            control.push_back(true);
        }
        feat_values.insert(feat_values.end(), row.begin(), row.end());
    }

    if (ids.empty()) {
        throw EmptyTableError("no valid rows (" + std::to_string(rejected.size()) + " rejected)");
    }
    auto const n = static_cast<Eigen::Index>(ids.size());
    auto const p = static_cast<Eigen::Index>(feat_cols.size());
    Eigen::MatrixXd feats = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        feat_values.data(), n, p);
    std::optional<std::vector<std::string>> diagnoses;
    if (dx_col) {
        diagnoses = std::move(diag);
    }
    return LoadResult{
        Table(std::move(ids), std::move(ds), std::move(ages), std::move(sexes), std::move(feat_names),
            std::move(feats), std::move(diagnoses), std::move(control)),
        std::move(rejected)};
}

LoadResult load_csv(std::filesystem::path const& path, SchemaConfig const& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot read " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema);
}

std::string to_csv(Table const& table, SchemaConfig const& schema)
{
    std::string out;
    out += schema.id_column + "," + schema.dataset_column + "," + schema.age_column + "," + schema.sex_column;
    bool const with_dx = table.diagnoses().has_value();
    if (with_dx) {
        out += "," + schema.diagnosis_column;
    }
    for (auto const& f : table.feature_names()) {
        out += "," + csv_escape(f);
    }
    out += '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        out += csv_escape(table.ids()[i]) + "," + csv_escape(table.dataset_labels()[i]) + ","
            + format_real(table.ages()[i]) + "," + std::to_string(table.sexes()[i]);
        if (with_dx) {
            out += "," + csv_escape((*table.diagnoses())[i]);
        }
        for (Eigen::Index j = 0; j < table.features().cols(); ++j) {
            out += "," + format_real(table.features()(static_cast<Eigen::Index>(i), j));
        }
        out += '\n';
    }
    return out;
}

void write_csv(std::filesystem::path const& path, Table const& table, SchemaConfig const& schema)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << to_csv(table, schema);
}

std::vector<DatasetSummary> summarize(Table const& table)
{
    if (table.empty()) {
        throw EmptyTableError("cannot summarize an empty table");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        groups[table.dataset_labels()[i]].push_back(i);
    }
    std::vector<DatasetSummary> out;
    for (auto const& [label, rows] : groups) {
        DatasetSummary s;
        s.dataset = label;
        s.n = rows.size();
        double sum = 0.0;
        std::size_t males = 0;
        for (auto r : rows) {
            sum += table.ages()[r];
            males += static_cast<std::size_t>(table.sexes()[r]);
            s.n_diseased += table.is_control(r) ? 0U : 1U;
        }
        s.age_mean = sum / static_cast<double>(s.n);
        if (s.n > 1) {
            double ss = 0.0;
            for (auto r : rows) {
                ss += (table.ages()[r] - s.age_mean) * (table.ages()[r] - s.age_mean);
            }
            s.age_sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        }
        s.male_percent = 100.0 * static_cast<double>(males) / static_cast<double>(s.n);
        out.push_back(std::move(s));
    }
    return out;
}

Standardized standardize_column(std::span<double const> values)
{
    if (values.size() < 2) {
        throw PreconditionError("standardization needs at least two values");
    }
    auto const n = static_cast<double>(values.size());
    double const mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    double const sd = std::sqrt(ss / n);
    if (!(sd > 1e-12)) {
        throw DegenerateColumnError("column has zero variance");
    }
    Standardized out;
    out.mean = mean;
    out.sd = sd;
    out.values.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.values(static_cast<Eigen::Index>(i)) = (values[i] - mean) / sd;
    }
    return out;
}

Standardized standardize_column(Eigen::VectorXd const& values)
{
    return standardize_column(std::span<double const>(values.data(), static_cast<std::size_t>(values.size())));
}

Eigen::VectorXd destandardize(Eigen::VectorXd const& standardized, double mean, double sd)
{
    return (standardized.array() * sd + mean).matrix();
}

std::string CauseTerm::name() const
{
    return transform == Transform::square ? column + "^2" : column;
}

CauseSpec CauseSpec::parse(std::string const& text, bool standardize)
{
    CauseSpec spec;
    spec.standardize = standardize;
    for (auto const& item : split_list(text)) {
        CauseTerm term;
        if (item.size() > 2 && item.compare(item.size() - 2, 2, "^2") == 0) {
            term.column = item.substr(0, item.size() - 2);
            term.transform = Transform::square;
        } else {
            term.column = item;
        }
        spec.terms.push_back(std::move(term));
    }
    spec.validate();
    return spec;
}

void CauseSpec::validate() const
{
    if (terms.empty()) {
        throw SchemaError("cause specification has no terms");
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            if (terms[i] == terms[j]) {
                throw SchemaError("duplicate cause term '" + terms[i].name() + "'");
            }
        }
    }
}

std::vector<std::string> CauseSpec::source_columns() const
{
    std::vector<std::string> out;
    for (auto const& t : terms) {
        if (std::find(out.begin(), out.end(), t.column) == out.end()) {
            out.push_back(t.column);
        }
    }
    return out;
}

std::string CauseSpec::to_string() const
{
    std::string out;
    for (auto const& t : terms) {
        if (!out.empty()) {
            out += ',';
        }
        out += t.name();
    }
    return out;
}

DesignMatrix build_design(Table const& table, CauseSpec const& spec)
{
    spec.validate();
    for (auto const& t : spec.terms) {
        if (!table.has_column(t.column)) {
            throw SchemaError("cause column '" + t.column + "' not in table");
        }
    }
    auto const n = static_cast<Eigen::Index>(table.rows());
    auto const m = static_cast<Eigen::Index>(spec.terms.size());
    if (n < m + 2) {
        throw PreconditionError("design needs n >= m + 2 rows (n=" + std::to_string(n)
            + ", m=" + std::to_string(m) + ")");
    }
    DesignMatrix d;
    d.values.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        auto const& term = spec.terms[static_cast<std::size_t>(j)];
        Eigen::VectorXd raw = table.column(term.column);
        if (term.transform == Transform::square) {
            raw = raw.array().square().matrix();
        }
        d.column_names.push_back(term.name());
        if (spec.standardize) {
            Standardized s;
            try {
                s = standardize_column(raw);
            } catch (DegenerateColumnError const&) {
                throw DegenerateColumnError("cause column '" + term.name() + "' has zero variance");
            }
            d.values.col(j) = s.values;
            d.scales.push_back({s.mean, s.sd});
        } else {
            d.values.col(j) = raw;
            d.scales.push_back({0.0, 1.0});
        }
    }
    return d;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split_indices(Table const& table, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw SplitError("train fraction must lie in (0, 1)");
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        groups[table.dataset_labels()[i]].push_back(i);
    }
    std::vector<std::size_t> train, test;
    for (auto& [label, rows] : groups) {
        if (rows.size() < 2) {
            throw SplitError("dataset '" + label + "' has fewer than two rows");
        }
        Rng rng(derive_seed(seed, {stable_hash(label)}));
        // Fisher-Yates with a portable integer distribution.
        for (std::size_t i = rows.size() - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(rng.uniform_int(0, i));
            std::swap(rows[i], rows[j]);
        }
        auto const n = static_cast<double>(rows.size());
        auto k = static_cast<std::size_t>(std::llround(train_fraction * n));
        k = std::clamp<std::size_t>(k, 1, rows.size());
        train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    }
    if (train.empty() || test.empty()) {
        throw SplitError("train fraction leaves an empty train or test set");
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::pair<Table, Table> stratified_split(Table const& table, double train_fraction, std::uint64_t seed)
{
    auto [train, test] = stratified_split_indices(table, train_fraction, seed);
    return {table.subset(train), table.subset(test)};
}

} // namespace biasaudit
