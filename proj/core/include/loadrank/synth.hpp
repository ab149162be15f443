#ifndef LOADRANK_SYNTH_HPP
#define LOADRANK_SYNTH_HPP

#include <cstdint>
#include <string>

#include "loadrank/dataset.hpp"

namespace loadrank {

/// Latent-factor fixture generator, the stand-in for the proprietary source
/// data. Informative features are noisy linear images of the latent
/// variables, noise features are i.i.d. standard normal, and the class is a
/// quantile-binned monotone function of the mean latent score.
struct SynthSpec {
    std::size_t n_samples = 600;
    std::size_t n_informative = 8;
    std::size_t n_noise = 32;
    std::size_t n_factors = 2;
    std::size_t n_classes = 4;
    std::uint64_t seed = 0;
    double loading = 0.9;  // correlation between a feature and its factor
};

/// Generates the dataset in memory. Classes are 1..n_classes.
Dataset generate_synthetic(const SynthSpec& spec);

/// Serializes the dataset as delimited text whose target column "rating"
/// carries Detailed-scheme rating strings (class c maps to the string of
/// category c), so the fixture round-trips through the normal ingest path.
std::string synthetic_to_csv(const Dataset& dataset);

/// Writes synthetic_to_csv(generate_synthetic(spec)) to a file. Byte-stable
/// for a fixed spec.
void write_synthetic(const SynthSpec& spec, const std::string& path);

}  // namespace loadrank

#endif
