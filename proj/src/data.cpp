#include "biascorr/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "biascorr/normal.hpp"
#include "biascorr/rng.hpp"

namespace biascorr {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("unparseable numeric cell '" + cell + "' at row " +
                                 std::to_string(row + 1) + ", column '" + col + "'");
    }
}

FeatureType feature_type_from_string(const std::string& s) {
    if (s == "continuous") return FeatureType::continuous;
    if (s == "categorical") return FeatureType::categorical;
    if (s == "binary") return FeatureType::binary;
    if (s == "ordinal") return FeatureType::ordinal;
    throw std::runtime_error("unknown feature type: " + s);
}

std::string feature_type_to_string(FeatureType t) {
    switch (t) {
        case FeatureType::continuous: return "continuous";
        case FeatureType::categorical: return "categorical";
        case FeatureType::binary: return "binary";
        case FeatureType::ordinal: return "ordinal";
    }
    return "?";
}

}  // namespace

bool BiasRule::holds(double value) const {
    if (comparator == ">") return value > threshold;
    if (comparator == ">=") return value >= threshold;
    if (comparator == "<") return value < threshold;
    if (comparator == "<=") return value <= threshold;
    throw std::invalid_argument("BiasRule: unknown comparator '" + comparator + "'");
}

void DatasetSchema::validate() const {
    if (features.empty()) throw std::runtime_error("schema: no features");
    std::set<std::string> sel(selection_features.begin(), selection_features.end());
    for (const auto& p : prediction_features) {
        if (sel.find(p) == sel.end()) {
            throw std::runtime_error("schema: prediction feature '" + p +
                                     "' is not among the selection features");
        }
    }
    if (bias_rule.has_value()) {
        bool found = false;
        for (const auto& f : features) {
            if (f.name == bias_rule->feature) {
                if (f.type == FeatureType::categorical || f.type == FeatureType::binary) {
                    throw std::runtime_error(
                        "schema: bias rule must reference a continuous or ordinal feature");
                }
                found = true;
            }
        }
        if (!found) {
            throw std::runtime_error("schema: bias rule feature '" + bias_rule->feature +
                                     "' not declared");
        }
    }
}

DatasetSchema DatasetSchema::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("schema parse error in " + path + ": " + e.what());
    }
    DatasetSchema s;
    s.target = j.at("target").get<std::string>();
    if (j.contains("target_positive")) {
        s.target_positive_values = {j.at("target_positive").get<std::string>()};
    }
    if (j.contains("target_positive_values")) {
        s.target_positive_values = j.at("target_positive_values").get<std::vector<std::string>>();
    }
    if (s.target_positive_values.empty()) {
        throw std::runtime_error("schema: target_positive(_values) required");
    }
    s.missing_marker = j.value("missing_marker", std::string{});
    const std::string delim = j.value("delimiter", std::string{","});
    if (delim.size() != 1) throw std::runtime_error("schema: delimiter must be one character");
    s.delimiter = delim[0];
    s.selection_column = j.value("selection_column", std::string{});
    for (const auto& jf : j.at("features")) {
        FeatureSpec f;
        f.name = jf.at("name").get<std::string>();
        f.type = feature_type_from_string(jf.value("type", std::string{"continuous"}));
        if (f.type == FeatureType::binary) f.positive = jf.at("positive").get<std::string>();
        if (f.type == FeatureType::ordinal) {
            for (const auto& [k, v] : jf.at("levels").items()) {
                f.levels[k] = v.get<double>();
            }
        }
        s.features.push_back(std::move(f));
    }
    s.selection_features = j.at("selection_features").get<std::vector<std::string>>();
    s.prediction_features = j.at("prediction_features").get<std::vector<std::string>>();
    if (j.contains("bias_rule")) {
        BiasRule r;
        r.feature = j["bias_rule"].at("feature").get<std::string>();
        r.comparator = j["bias_rule"].at("comparator").get<std::string>();
        r.threshold = j["bias_rule"].at("threshold").get<double>();
        s.bias_rule = r;
    }
    s.validate();
    return s;
}

void DatasetSchema::to_json_file(const std::string& path) const {
    nlohmann::ordered_json j;
    j["target"] = target;
    j["target_positive_values"] = target_positive_values;
    if (!missing_marker.empty()) j["missing_marker"] = missing_marker;
    j["delimiter"] = std::string(1, delimiter);
    if (!selection_column.empty()) j["selection_column"] = selection_column;
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : features) {
        nlohmann::ordered_json jf;
        jf["name"] = f.name;
        jf["type"] = feature_type_to_string(f.type);
        if (f.type == FeatureType::binary) jf["positive"] = f.positive;
        if (f.type == FeatureType::ordinal) {
            nlohmann::ordered_json lv;
            for (const auto& [k, v] : f.levels) lv[k] = v;
            jf["levels"] = lv;
        }
        j["features"].push_back(jf);
    }
    j["selection_features"] = selection_features;
    j["prediction_features"] = prediction_features;
    if (bias_rule.has_value()) {
        j["bias_rule"] = {{"feature", bias_rule->feature},
                          {"comparator", bias_rule->comparator},
                          {"threshold", bias_rule->threshold}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schema file: " + path);
    out << j.dump(2) << "\n";
}

RawTable read_csv(const std::string& path, char delimiter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    RawTable t;
    std::string line;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, delimiter)) cells.push_back(trim(cell));
        if (!line.empty() && line.back() == delimiter) cells.push_back("");
        if (header) {
            t.columns = std::move(cells);
            header = false;
        } else {
            if (cells.size() != t.columns.size()) {
                throw std::runtime_error("row " + std::to_string(lineno) + " in " + path +
                                         " has " + std::to_string(cells.size()) +
                                         " cells, expected " + std::to_string(t.columns.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.columns.empty()) throw std::runtime_error("empty dataset file: " + path);
    return t;
}

namespace {

std::size_t raw_column(const RawTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (t.columns[i] == name) return i;
    }
    throw std::runtime_error("missing column '" + name + "' in input table");
}

}  // namespace

RawTable preprocess_adult(const RawTable& raw) {
    const std::size_t c_work = raw_column(raw, "workclass");
    const std::size_t c_marital = raw_column(raw, "marital-status");
    const std::size_t c_country = raw_column(raw, "native-country");
    const std::size_t c_fnlwgt = raw_column(raw, "fnlwgt");
    const std::size_t c_race = raw_column(raw, "race");

    // country frequencies over rows with no missing cell
    std::map<std::string, std::size_t> country_count;
    std::vector<bool> keep(raw.rows.size(), true);
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        for (const auto& cell : raw.rows[i]) {
            if (cell == "?") {
                keep[i] = false;
                break;
            }
        }
        if (keep[i]) country_count[raw.rows[i][c_country]] += 1;
    }

    RawTable out;
    for (std::size_t c = 0; c < raw.columns.size(); ++c) {
        if (c == c_fnlwgt || c == c_race) continue;
        out.columns.push_back(raw.columns[c]);
    }
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        if (!keep[i]) continue;
        std::vector<std::string> row;
        for (std::size_t c = 0; c < raw.columns.size(); ++c) {
            if (c == c_fnlwgt || c == c_race) continue;
            std::string cell = raw.rows[i][c];
            if (c == c_marital) {
                cell = (cell == "Married-civ-spouse" || cell == "Married-spouse-absent" ||
                        cell == "Married-AF-spouse")
                           ? "married"
                           : "not-married";
            } else if (c == c_country) {
                if (country_count[cell] <= 150) cell = "Other";
            } else if (c == c_work) {
                cell = (cell == "Federal-gov" || cell == "Local-gov" || cell == "State-gov")
                           ? "government"
                           : "private";
            }
            row.push_back(std::move(cell));
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::size_t Dataset::column(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        if (feature_names[i] == name) return i;
    }
    throw std::invalid_argument("unknown encoded column '" + name + "'");
}

Dataset encode_dataset(const RawTable& raw, const DatasetSchema& schema) {
    schema.validate();
    Dataset d;
    d.schema = schema;

    const std::size_t c_target = raw_column(raw, schema.target);
    std::optional<std::size_t> c_selection;
    if (!schema.selection_column.empty()) {
        c_selection = raw_column(raw, schema.selection_column);
    }
    std::vector<std::size_t> feat_cols;
    for (const auto& f : schema.features) feat_cols.push_back(raw_column(raw, f.name));

    // drop rows carrying the missing marker
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        bool ok = true;
        if (!schema.missing_marker.empty()) {
            for (const auto& cell : raw.rows[i]) {
                if (cell == schema.missing_marker) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) rows.push_back(i);
    }
    if (rows.empty()) throw std::runtime_error("dataset has no usable rows");

    // category inventories for one-hot features, lexicographic column order
    std::vector<std::vector<std::string>> categories(schema.features.size());
    for (std::size_t fi = 0; fi < schema.features.size(); ++fi) {
        if (schema.features[fi].type != FeatureType::categorical) continue;
        std::set<std::string> values;
        for (std::size_t r : rows) values.insert(raw.rows[r][feat_cols[fi]]);
        categories[fi].assign(values.begin(), values.end());
    }

    for (std::size_t fi = 0; fi < schema.features.size(); ++fi) {
        const auto& f = schema.features[fi];
        switch (f.type) {
            case FeatureType::continuous:
            case FeatureType::ordinal:
                d.feature_names.push_back(f.name);
                d.standardizable.push_back(true);
                break;
            case FeatureType::binary:
                d.feature_names.push_back(f.name);
                d.standardizable.push_back(false);
                break;
            case FeatureType::categorical:
                for (const auto& v : categories[fi]) {
                    d.feature_names.push_back(f.name + "_" + v);
                    d.standardizable.push_back(false);
                }
                break;
        }
    }

    const std::set<std::string> positives(schema.target_positive_values.begin(),
                                          schema.target_positive_values.end());
    d.X.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t r = rows[k];
        Vec enc;
        enc.reserve(d.feature_names.size());
        for (std::size_t fi = 0; fi < schema.features.size(); ++fi) {
            const auto& f = schema.features[fi];
            const std::string& cell = raw.rows[r][feat_cols[fi]];
            switch (f.type) {
                case FeatureType::continuous:
                    enc.push_back(parse_double(cell, r, f.name));
                    break;
                case FeatureType::ordinal: {
                    const auto it = f.levels.find(cell);
                    if (it == f.levels.end()) {
                        throw std::runtime_error("unknown level '" + cell + "' for ordinal '" +
                                                 f.name + "' at row " + std::to_string(r + 1));
                    }
                    enc.push_back(it->second);
                    break;
                }
                case FeatureType::binary:
                    enc.push_back(cell == f.positive ? 1.0 : 0.0);
                    break;
                case FeatureType::categorical:
                    for (const auto& v : categories[fi]) enc.push_back(cell == v ? 1.0 : 0.0);
                    break;
            }
        }
        d.X.push_back(std::move(enc));
        d.y.push_back(positives.count(raw.rows[r][c_target]) ? 1 : 0);
        double sel = 1.0;
        if (c_selection.has_value()) {
            sel = parse_double(raw.rows[r][*c_selection], r, schema.selection_column);
            if (sel < 0.0 || sel > 1.0) {
                throw std::runtime_error("selection value out of [0,1] at row " +
                                         std::to_string(r + 1));
            }
        }
        d.selection.push_back(sel);
        d.row_ids.push_back(r);
    }

    // roles may name an encoded column directly or an original categorical
    // feature, which expands to all of its one-hot columns
    std::map<std::string, std::vector<std::size_t>> expansion;
    {
        std::size_t col = 0;
        for (std::size_t fi = 0; fi < schema.features.size(); ++fi) {
            const std::size_t width = schema.features[fi].type == FeatureType::categorical
                                          ? categories[fi].size()
                                          : 1;
            for (std::size_t k = 0; k < width; ++k) {
                expansion[schema.features[fi].name].push_back(col++);
            }
        }
    }
    auto resolve = [&](const std::vector<std::string>& names) {
        std::vector<std::size_t> idx;
        for (const auto& name : names) {
            bool direct = false;
            for (std::size_t c = 0; c < d.feature_names.size(); ++c) {
                if (d.feature_names[c] == name) {
                    idx.push_back(c);
                    direct = true;
                    break;
                }
            }
            if (direct) continue;
            const auto it = expansion.find(name);
            if (it == expansion.end()) {
                throw std::runtime_error("unknown feature role '" + name + "'");
            }
            idx.insert(idx.end(), it->second.begin(), it->second.end());
        }
        return idx;
    };
    d.sel_idx = resolve(schema.selection_features);
    d.pred_idx = resolve(schema.prediction_features);
    return d;
}

Dataset load_csv_dataset(const std::string& path, const DatasetSchema& schema) {
    return encode_dataset(read_csv(path, schema.delimiter), schema);
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out.precision(17);
    for (const auto& name : d.feature_names) out << name << ",";
    out << d.schema.target << ",selection\n";
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (double v : d.X[i]) out << v << ",";
        out << d.y[i] << "," << d.selection[i] << "\n";
    }
}

Standardizer Standardizer::fit(const Dataset& d) {
    const std::size_t cols = d.feature_names.size();
    Standardizer s;
    s.mean.assign(cols, 0.0);
    s.scale.assign(cols, 1.0);
    s.active.assign(cols, false);
    if (d.n() == 0) throw std::invalid_argument("Standardizer: empty dataset");
    for (std::size_t c = 0; c < cols; ++c) {
        if (!d.standardizable[c]) continue;
        s.active[c] = true;
        double sum = 0.0;
        for (const auto& row : d.X) sum += row[c];
        const double mean = sum / static_cast<double>(d.n());
        double sq = 0.0;
        for (const auto& row : d.X) sq += (row[c] - mean) * (row[c] - mean);
        const double var = sq / static_cast<double>(d.n());
        s.mean[c] = mean;
        // a constant column standardizes to all-zeros
        s.scale[c] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Vec Standardizer::apply_row(const Vec& row) const {
    Vec out = row;
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (active[c]) out[c] = (out[c] - mean[c]) / scale[c];
    }
    return out;
}

Vec Standardizer::restore_row(const Vec& row) const {
    Vec out = row;
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (active[c]) out[c] = out[c] * scale[c] + mean[c];
    }
    return out;
}

Mat Standardizer::apply(const Mat& x) const {
    Mat out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(apply_row(row));
    return out;
}

Dataset inject_mnar_bias(const Dataset& d, const BiasRule& rule) {
    // the rule must name an original continuous/ordinal column, not a one-hot slice
    bool declared = false;
    for (const auto& f : d.schema.features) {
        if (f.name == rule.feature) {
            if (f.type == FeatureType::categorical || f.type == FeatureType::binary) {
                throw std::invalid_argument(
                    "inject_mnar_bias: rule must use a continuous or ordinal feature");
            }
            declared = true;
        }
    }
    if (!declared) {
        throw std::invalid_argument("inject_mnar_bias: rule feature '" + rule.feature +
                                    "' is not an original feature column");
    }
    const std::size_t c = d.column(rule.feature);
    Dataset out = d;
    for (std::size_t i = 0; i < out.n(); ++i) {
        out.selection[i] = rule.holds(out.X[i][c]) ? 1.0 : 0.0;
    }
    return out;
}

BiasRule rule_for_target_eta(const Dataset& d, const BiasRule& base, double target_eta) {
    if (!(target_eta >= 0.0 && target_eta < 1.0)) {
        throw std::invalid_argument("rule_for_target_eta: eta must lie in [0,1)");
    }
    const std::size_t c = d.column(base.feature);
    Vec values(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) values[i] = d.X[i][c];
    std::sort(values.begin(), values.end());
    if (values.front() == values.back()) {
        throw std::runtime_error("rule_for_target_eta: feature '" + base.feature +
                                 "' is constant, target eta unreachable");
    }
    // keep-labels is the complement of eta; pick the empirical quantile so the
    // rule passes about (1 - eta) of the rows
    BiasRule r = base;
    const bool keep_high = (base.comparator == ">" || base.comparator == ">=");
    const double q = keep_high ? target_eta : 1.0 - target_eta;
    const std::size_t k =
        std::min(d.n() - 1, static_cast<std::size_t>(q * static_cast<double>(d.n())));
    r.threshold = values[k];
    return r;
}

Dataset apply_masking(const Dataset& train, std::optional<double> target_eta) {
    if (target_eta.has_value()) {
        if (!train.schema.bias_rule.has_value()) {
            throw std::invalid_argument("eta retargeting needs a bias rule in the schema");
        }
        return inject_mnar_bias(train,
                                rule_for_target_eta(train, *train.schema.bias_rule,
                                                    *target_eta));
    }
    for (double s : train.selection) {
        if (s == 0.0) return train;  // already masked (generator or saved CSV)
    }
    if (train.schema.bias_rule.has_value()) {
        return inject_mnar_bias(train, *train.schema.bias_rule);
    }
    return train;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double fraction,
                                             std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("train_test_split: fraction must lie in (0,1)");
    }
    const std::size_t n = d.n();
    const std::size_t k = static_cast<std::size_t>(fraction * static_cast<double>(n));
    if (k == 0 || k == n) {
        throw std::invalid_argument("train_test_split: split would leave one side empty");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed, rng_stream::split);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
    }
    auto take = [&](std::size_t from, std::size_t to) {
        Dataset out;
        out.schema = d.schema;
        out.feature_names = d.feature_names;
        out.standardizable = d.standardizable;
        out.sel_idx = d.sel_idx;
        out.pred_idx = d.pred_idx;
        for (std::size_t i = from; i < to; ++i) {
            out.X.push_back(d.X[idx[i]]);
            out.y.push_back(d.y[idx[i]]);
            out.selection.push_back(d.selection[idx[i]]);
            out.row_ids.push_back(d.row_ids[idx[i]]);
        }
        return out;
    };
    return {take(0, k), take(k, n)};
}

double missingness_ratio(const Dataset& d) {
    if (d.n() == 0) throw std::invalid_argument("missingness_ratio: empty dataset");
    std::size_t unlabeled = 0;
    for (double s : d.selection) {
        if (s == 0.0) ++unlabeled;
    }
    return static_cast<double>(unlabeled) / static_cast<double>(d.n());
}

std::vector<SelectionSample> make_selection_samples(const Dataset& d, const Mat& x_std) {
    if (x_std.size() != d.n()) {
        throw std::invalid_argument("make_selection_samples: matrix size mismatch");
    }
    std::vector<SelectionSample> out;
    out.reserve(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        SelectionSample s;
        s.x_sel.reserve(d.sel_idx.size() + 1);
        for (std::size_t c : d.sel_idx) s.x_sel.push_back(x_std[i][c]);
        s.x_sel.push_back(1.0);
        s.x_pred.reserve(d.pred_idx.size() + 1);
        for (std::size_t c : d.pred_idx) s.x_pred.push_back(x_std[i][c]);
        s.x_pred.push_back(1.0);
        s.selection = d.selection[i];
        if (d.selection[i] > 0.0) s.label = d.y[i];
        out.push_back(std::move(s));
    }
    return out;
}

Mat feature_matrix(const Mat& x_std, const std::vector<std::size_t>& cols) {
    Mat out;
    out.reserve(x_std.size());
    for (const auto& row : x_std) {
        Vec r;
        r.reserve(cols.size());
        for (std::size_t c : cols) r.push_back(row[c]);
        out.push_back(std::move(r));
    }
    return out;
}

void SynthSpec::validate() const {
    if (n == 0) throw std::invalid_argument("SynthSpec: n must be positive");
    if (d_pred > d_sel) {
        throw std::invalid_argument("SynthSpec: prediction features must be a subset "
                                    "of the selection features");
    }
    if (gamma.size() != d_sel + 1 || beta.size() != d_pred + 1) {
        throw std::invalid_argument("SynthSpec: coefficient sizes must be d+1 (intercept last)");
    }
    if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("SynthSpec: |rho| must be < 1");
    if (sigma < 0.0) throw std::invalid_argument("SynthSpec: sigma must be >= 0");
    for (double g : gamma) {
        if (!std::isfinite(g)) throw std::invalid_argument("SynthSpec: non-finite gamma");
    }
    for (double b : beta) {
        if (!std::isfinite(b)) throw std::invalid_argument("SynthSpec: non-finite beta");
    }
}

double intercept_for_selection_rate(const Vec& gamma_covariates, double rate) {
    double norm2 = 0.0;
    for (double g : gamma_covariates) norm2 += g * g;
    return std_normal_quantile(rate) * std::sqrt(norm2 + 1.0);
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    SyntheticData out;
    Dataset& d = out.dataset;
    SynthTruth& t = out.truth;

    DatasetSchema schema;
    schema.target = "label";
    schema.target_positive_values = {"1"};
    schema.selection_column = "selection";
    // default rule so eta retargeting works on generated data; the generator's
    // own masking takes precedence otherwise
    schema.bias_rule = BiasRule{"f1", ">", 0.0};
    for (std::size_t j = 0; j < spec.d_sel; ++j) {
        FeatureSpec f;
        f.name = "f" + std::to_string(j + 1);
        f.type = FeatureType::continuous;
        schema.features.push_back(std::move(f));
        schema.selection_features.push_back("f" + std::to_string(j + 1));
        if (j < spec.d_pred) schema.prediction_features.push_back("f" + std::to_string(j + 1));
    }
    d.schema = schema;
    for (const auto& f : schema.features) {
        d.feature_names.push_back(f.name);
        d.standardizable.push_back(true);
    }

    Rng rng(spec.seed, rng_stream::synth);
    const GaussHermite rule = gauss_hermite(64);
    const double sqr = std::sqrt(1.0 - spec.rho * spec.rho);
    d.X.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Vec x(spec.d_sel);
        for (auto& v : x) v = rng.normal();
        const double eps = rng.normal();
        const double v_noise = rng.normal();
        const double u = spec.rho * eps + sqr * v_noise;

        double gx = spec.gamma[spec.d_sel];  // intercept
        for (std::size_t j = 0; j < spec.d_sel; ++j) gx += spec.gamma[j] * x[j];
        const double z = gx + u;
        const int s = z > 0.0 ? 1 : 0;

        double bx = spec.beta[spec.d_pred];
        for (std::size_t j = 0; j < spec.d_pred; ++j) bx += spec.beta[j] * x[j];
        const double q1 = sigmoid(bx + spec.sigma * eps);
        const int y = rng.uniform() < q1 ? 1 : 0;

        t.p_select.push_back(std_normal_cdf(gx));
        const double f_y = integrate_gaussian(rule, [&](double e) {
            const double q = sigmoid(bx + spec.sigma * e);
            return y == 1 ? q : 1.0 - q;
        });
        t.f_label.push_back(f_y);
        t.eps.push_back(eps);
        t.v.push_back(v_noise);
        t.u_sel.push_back(u);
        t.z.push_back(z);

        d.X.push_back(std::move(x));
        d.y.push_back(y);
        d.selection.push_back(static_cast<double>(s));
        d.row_ids.push_back(i);
    }
    for (std::size_t j = 0; j < spec.d_sel; ++j) d.sel_idx.push_back(j);
    for (std::size_t j = 0; j < spec.d_pred; ++j) d.pred_idx.push_back(j);
    return out;
}

}  // namespace biascorr
