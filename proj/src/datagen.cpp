#include "lvr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lvr/error.hpp"
#include "lvr/rng.hpp"

namespace lvr {

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        default: return "test";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw ValidationError("unknown split tag '" + s + "' (expected train, val or test)");
}

void SyntheticSpec::validate() const {
    if (n_samples == 0) throw ValidationError("synthetic: n_samples must be positive");
    if (n_classes < 2) throw ValidationError("synthetic: n_classes must be >= 2");
    if (n_samples < n_classes)
        throw ValidationError("synthetic: n_samples must be >= n_classes");
    if (input_dim == 0) throw ValidationError("synthetic: input_dim must be positive");
    if (n_attr_values.size() != attr_strength.size())
        throw ValidationError("synthetic: n_attr_values and attr_strength lengths differ");
    for (std::size_t v : n_attr_values)
        if (v < 2) throw ValidationError("synthetic: each attribute needs >= 2 values");
    if (task_strength < 0.0) throw ValidationError("synthetic: task_strength must be >= 0");
    for (double s : attr_strength)
        if (s < 0.0) throw ValidationError("synthetic: attr_strength must be >= 0");
    if (noise_std < 0.0) throw ValidationError("synthetic: noise_std must be >= 0");
}

std::vector<std::size_t> Dataset::split_indices(Split s) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) idx.push_back(i);
    return idx;
}

void Dataset::validate() const {
    const std::size_t n = task_labels.size();
    if (inputs.rows() != n || split.size() != n)
        throw ValidationError("dataset: row count mismatch");
    for (int y : task_labels)
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw ValidationError("dataset: task label out of range");
    if (protected_labels.size() != attr_cardinalities.size() ||
        protected_labels.size() != attr_names.size())
        throw ValidationError("dataset: attribute metadata mismatch");
    for (std::size_t a = 0; a < protected_labels.size(); ++a) {
        if (protected_labels[a].size() != n)
            throw ValidationError("dataset: protected label count mismatch");
        for (int v : protected_labels[a])
            if (v < 0 || static_cast<std::size_t>(v) >= attr_cardinalities[a])
                throw ValidationError("dataset: protected label out of range");
    }
}

namespace {

// unit-norm rows so strengths are directly comparable scale knobs
Matrix draw_prototypes(Rng& rng, std::size_t count, std::size_t dim) {
    Matrix p(count, dim);
    for (std::size_t i = 0; i < count; ++i) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            p(i, j) = rng.normal();
            norm2 += p(i, j) * p(i, j);
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < dim; ++j) p(i, j) *= inv;
    }
    return p;
}

}  // namespace

Dataset generate(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    const Matrix task_protos = draw_prototypes(rng, spec.n_classes, spec.input_dim);
    std::vector<Matrix> attr_protos;
    for (std::size_t a = 0; a < spec.n_attr_values.size(); ++a)
        attr_protos.push_back(draw_prototypes(rng, spec.n_attr_values[a], spec.input_dim));

    Dataset ds;
    ds.n_classes = spec.n_classes;
    ds.task_labels.resize(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i)
        ds.task_labels[i] = static_cast<int>(rng.below(spec.n_classes));
    for (std::size_t a = 0; a < spec.n_attr_values.size(); ++a) {
        std::vector<int> vals(spec.n_samples);
        for (std::size_t i = 0; i < spec.n_samples; ++i)
            vals[i] = static_cast<int>(rng.below(spec.n_attr_values[a]));
        ds.protected_labels.push_back(std::move(vals));
        ds.attr_cardinalities.push_back(spec.n_attr_values[a]);
        ds.attr_names.push_back("attr" + std::to_string(a));
    }

    // every class appears at least once: patch missing class c into position c
    std::vector<bool> seen(spec.n_classes, false);
    for (int y : ds.task_labels) seen[static_cast<std::size_t>(y)] = true;
    for (std::size_t c = 0; c < spec.n_classes; ++c)
        if (!seen[c]) ds.task_labels[c] = static_cast<int>(c);

    ds.inputs = Matrix(spec.n_samples, spec.input_dim);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const std::size_t y = static_cast<std::size_t>(ds.task_labels[i]);
        for (std::size_t j = 0; j < spec.input_dim; ++j)
            ds.inputs(i, j) = spec.task_strength * task_protos(y, j);
        for (std::size_t a = 0; a < attr_protos.size(); ++a) {
            const std::size_t v = static_cast<std::size_t>(ds.protected_labels[a][i]);
            for (std::size_t j = 0; j < spec.input_dim; ++j)
                ds.inputs(i, j) += spec.attr_strength[a] * attr_protos[a](v, j);
        }
        for (std::size_t j = 0; j < spec.input_dim; ++j)
            ds.inputs(i, j) += rng.normal(0.0, spec.noise_std);
    }

    ds.split.assign(spec.n_samples, Split::Train);
    return ds;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_double(const std::string& cell, std::size_t line_no, const std::string& column) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size())
        throw ValidationError("csv: non-numeric value '" + cell + "' at line " +
                              std::to_string(line_no) + ", column '" + column + "'");
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.input_columns.empty())
        throw ValidationError("csv schema: at least one input column required");
    if (schema.task_column.empty()) throw ValidationError("csv schema: task column required");

    std::ifstream in(path);
    if (!in) throw ValidationError("csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: no data rows in '" + path + "'");
    const std::vector<std::string> header = split_line(line);
    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);

    auto find_col = [&](const std::string& name) {
        const auto it = col_index.find(name);
        if (it == col_index.end())
            throw ValidationError("csv: unknown column '" + name + "' in '" + path + "'");
        return it->second;
    };

    std::vector<std::size_t> input_idx;
    for (const auto& c : schema.input_columns) input_idx.push_back(find_col(c));
    const std::size_t task_idx = find_col(schema.task_column);
    std::vector<std::size_t> attr_idx;
    for (const auto& c : schema.attr_columns) attr_idx.push_back(find_col(c));
    const bool has_split = !schema.split_column.empty();
    const std::size_t split_idx = has_split ? find_col(schema.split_column) : 0;

    std::vector<std::vector<double>> features;
    std::vector<std::string> task_raw;
    std::vector<std::vector<std::string>> attr_raw(schema.attr_columns.size());
    std::vector<Split> splits;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ValidationError("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(input_idx.size());
        for (std::size_t c = 0; c < input_idx.size(); ++c)
            row.push_back(parse_double(cells[input_idx[c]], line_no, schema.input_columns[c]));
        features.push_back(std::move(row));
        task_raw.push_back(cells[task_idx]);
        for (std::size_t a = 0; a < attr_idx.size(); ++a)
            attr_raw[a].push_back(cells[attr_idx[a]]);
        if (has_split) splits.push_back(split_from_string(cells[split_idx]));
    }
    if (features.empty()) throw ValidationError("csv: no data rows in '" + path + "'");

    auto encode = [](const std::vector<std::string>& raw, std::size_t& cardinality) {
        std::map<std::string, int> ids;
        std::vector<int> out;
        out.reserve(raw.size());
        for (const auto& v : raw) {
            const auto it = ids.find(v);
            if (it != ids.end()) {
                out.push_back(it->second);
            } else {
                const int id = static_cast<int>(ids.size());
                ids.emplace(v, id);
                out.push_back(id);
            }
        }
        cardinality = ids.size();
        return out;
    };

    Dataset ds;
    ds.inputs = Matrix(features.size(), input_idx.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = 0; j < input_idx.size(); ++j) ds.inputs(i, j) = features[i][j];
    ds.task_labels = encode(task_raw, ds.n_classes);
    for (std::size_t a = 0; a < attr_raw.size(); ++a) {
        std::size_t card = 0;
        ds.protected_labels.push_back(encode(attr_raw[a], card));
        ds.attr_cardinalities.push_back(card);
        ds.attr_names.push_back(schema.attr_columns[a]);
    }
    ds.split = has_split ? std::move(splits) : std::vector<Split>(features.size(), Split::Train);
    return ds;
}

void write_csv(const Dataset& dataset, const std::string& path, bool include_split) {
    dataset.validate();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    for (std::size_t j = 0; j < dataset.inputs.cols(); ++j) out << "f" << j << ",";
    out << "task";
    for (const auto& name : dataset.attr_names) out << "," << name;
    if (include_split) out << ",split";
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
        for (std::size_t j = 0; j < dataset.inputs.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.inputs(i, j));
            out << buf << ",";
        }
        out << dataset.task_labels[i];
        for (const auto& attr : dataset.protected_labels) out << "," << attr[i];
        if (include_split) out << "," << to_string(dataset.split[i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

Dataset split(const Dataset& dataset, double train_frac, double val_frac, double test_frac,
              std::uint64_t seed) {
    dataset.validate();
    if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0)
        throw ValidationError("split: fractions must be non-negative");
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
        throw ValidationError("split: fractions must sum to 1");

    Dataset out = dataset;
    Rng rng(seed);
    const double fracs[3] = {train_frac, val_frac, test_frac};
    for (std::size_t cls = 0; cls < dataset.n_classes; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.n_samples(); ++i)
            if (dataset.task_labels[i] == static_cast<int>(cls)) idx.push_back(i);
        if (idx.empty()) continue;
        rng.shuffle(idx);

        // largest-remainder apportionment; ties resolved train > val > test
        const double n = static_cast<double>(idx.size());
        std::size_t counts[3];
        double rema[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double want = fracs[s] * n;
            counts[s] = static_cast<std::size_t>(std::floor(want + 1e-12));
            rema[s] = want - static_cast<double>(counts[s]);
            assigned += counts[s];
        }
        while (assigned < idx.size()) {
            int best = 0;
            for (int s = 1; s < 3; ++s)
                if (rema[s] > rema[best]) best = s;
            ++counts[best];
            rema[best] = -1.0;
            ++assigned;
        }
        if (train_frac > 0.0 && counts[0] == 0) {
            // train must see every class when mathematically possible
            if (counts[1] > 0) {
                --counts[1];
            } else {
                --counts[2];
            }
            ++counts[0];
        }
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t c = 0; c < counts[s]; ++c)
                out.split[idx[pos++]] = static_cast<Split>(s);
    }
    return out;
}

}  // namespace lvr
