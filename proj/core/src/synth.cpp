#include "loadrank/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "loadrank/errors.hpp"
#include "loadrank/rng.hpp"

namespace loadrank {

namespace {

constexpr std::uint64_t kSynthTag = 0x53594e54ULL;  // "SYNT"

std::string pad2(std::size_t v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
    if (spec.n_informative < spec.n_factors) {
        throw ValidationError("n_informative must be >= n_factors");
    }
    if (spec.n_factors == 0 && spec.n_informative > 0) {
        throw ValidationError("informative features need at least one latent factor");
    }
    if (spec.n_classes < 2 || spec.n_classes > 21) {
        throw ValidationError("n_classes must be in 2..21");
    }
    if (spec.n_samples < 2 * spec.n_classes) {
        throw ValidationError("need at least 2 samples per class");
    }
    if (!(spec.loading > 0.0 && spec.loading < 1.0)) {
        throw ValidationError("loading must be in (0, 1)");
    }
    const std::size_t p = spec.n_informative + spec.n_noise;
    if (p < 2) throw ValidationError("need at least 2 feature columns");

    GaussianGen gauss(Pcg32(derive_seed(spec.seed, {kSynthTag})));

    const std::size_t n = spec.n_samples;
    Matrix latents(n, spec.n_factors);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < spec.n_factors; ++f) {
            latents(i, f) = gauss.next();
        }
    }

    Dataset ds;
    ds.X = Matrix(n, p);
    const double unique_scale = std::sqrt(1.0 - spec.loading * spec.loading);
    for (std::size_t j = 0; j < spec.n_informative; ++j) {
        std::size_t f = j % spec.n_factors;  // round-robin over factors
        ds.feature_names.push_back("inf_" + pad2(j + 1));
        for (std::size_t i = 0; i < n; ++i) {
            ds.X(i, j) = spec.loading * latents(i, f) + unique_scale * gauss.next();
        }
    }
    for (std::size_t j = 0; j < spec.n_noise; ++j) {
        ds.feature_names.push_back("noise_" + pad2(j + 1));
        for (std::size_t i = 0; i < n; ++i) {
            ds.X(i, spec.n_informative + j) = gauss.next();
        }
    }

    // Class = equal-frequency bin of the mean latent score, so every factor
    // carries signal about the target. Without factors the score is an
    // independent draw: balanced classes carrying no feature signal.
    std::vector<double> score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.n_factors == 0) {
            score[i] = gauss.next();
            continue;
        }
        for (std::size_t f = 0; f < spec.n_factors; ++f) score[i] += latents(i, f);
        score[i] /= std::sqrt(static_cast<double>(spec.n_factors));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });
    ds.y.assign(n, 0);
    for (std::size_t rank = 0; rank < n; ++rank) {
        ds.y[order[rank]] =
            static_cast<int>((rank * spec.n_classes) / n) + 1;  // 1..n_classes
    }
    return ds;
}

std::string synthetic_to_csv(const Dataset& dataset) {
    RatingMapping detailed = RatingMapping::detailed();
    std::vector<std::string> category_to_rating(detailed.category_count() + 1);
    for (const auto& [name, category] : detailed.entries()) {
        category_to_rating[static_cast<std::size_t>(category)] = name;
    }

    std::string out;
    for (const std::string& name : dataset.feature_names) {
        out += name;
        out += ',';
    }
    out += "rating\n";
    char buf[64];
    for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
        for (std::size_t j = 0; j < dataset.n_features(); ++j) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), dataset.X(i, j));
            out.append(buf, ptr);
            out += ',';
        }
        out += category_to_rating.at(static_cast<std::size_t>(dataset.y[i]));
        out += '\n';
    }
    return out;
}

void write_synthetic(const SynthSpec& spec, const std::string& path) {
    std::string csv = synthetic_to_csv(generate_synthetic(spec));
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open \"" + path + "\" for writing");
    std::size_t written = std::fwrite(csv.data(), 1, csv.size(), f);
    if (std::fclose(f) != 0 || written != csv.size()) {
        throw IoError("write failure on \"" + path + "\"");
    }
}

}  // namespace loadrank
