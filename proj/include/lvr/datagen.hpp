#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvr/matrix.hpp"

namespace lvr {

enum class Split : std::uint8_t { Train, Val, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);  // throws ValidationError

// Prototype-plus-noise generator: each sample is its class prototype scaled by
// task_strength, plus one prototype per protected attribute scaled by that
// attribute's strength, plus Gaussian noise. attr_strength is the leakage knob;
// zero strength makes the attribute statistically independent of the features.
struct SyntheticSpec {
    std::size_t n_samples = 0;
    std::size_t n_classes = 0;
    std::vector<std::size_t> n_attr_values;  // one entry per protected attribute
    std::size_t input_dim = 0;
    double task_strength = 0.0;
    std::vector<double> attr_strength;       // one entry per protected attribute
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    Matrix inputs;  // n_samples x input_dim
    std::vector<int> task_labels;
    std::size_t n_classes = 0;
    std::vector<std::vector<int>> protected_labels;  // [attribute][sample]
    std::vector<std::size_t> attr_cardinalities;
    std::vector<std::string> attr_names;
    std::vector<Split> split;

    std::size_t n_samples() const { return task_labels.size(); }
    std::vector<std::size_t> split_indices(Split s) const;
    void validate() const;
};

Dataset generate(const SyntheticSpec& spec);

struct CsvSchema {
    std::vector<std::string> input_columns;
    std::string task_column;
    std::vector<std::string> attr_columns;
    std::string split_column;  // empty = no split column
};

// Header row required; labels are re-encoded to dense ids in first-seen order.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Inverse of load_csv for the gen subcommand: f0..f{D-1},task,<attr names>[,split]
void write_csv(const Dataset& dataset, const std::string& path, bool include_split = false);

// Stratified by task label; deterministic in seed; does not mutate the input.
Dataset split(const Dataset& dataset, double train_frac, double val_frac, double test_frac,
              std::uint64_t seed);

}  // namespace lvr
