#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "cfx/autoencoder.hpp"
#include "cfx/classifier.hpp"

namespace cfx {

// Binary parameter file, little-endian:
//   magic "CFXMODEL" | u32 version | u32 kind | u64 channels | u64 length |
//   u8 has_norm [f64 mean[C], f64 stddev[C]] | kind-specific payload
// Payloads hold spec fields followed by row-major weight arrays as IEEE-754 doubles.
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint32_t { knn = 1, mlp = 2, autoencoder = 3 };

struct LoadedClassifier {
    std::unique_ptr<Classifier> model;
    std::optional<NormStats> norm_stats;
};

std::string serialize_classifier(const Classifier& model, const std::optional<NormStats>& norm = std::nullopt);
LoadedClassifier deserialize_classifier(std::string_view bytes);

std::string serialize_autoencoder(const Autoencoder& ae, const std::optional<NormStats>& norm = std::nullopt);
Autoencoder deserialize_autoencoder(std::string_view bytes);

/// Kind recorded in a parameter file header; FormatError on bad magic or version.
ModelKind peek_model_kind(std::string_view bytes);

void save_classifier(const std::filesystem::path& path, const Classifier& model,
                     const std::optional<NormStats>& norm = std::nullopt);
LoadedClassifier load_classifier(const std::filesystem::path& path);
void save_autoencoder(const std::filesystem::path& path, const Autoencoder& ae,
                      const std::optional<NormStats>& norm = std::nullopt);
Autoencoder load_autoencoder(const std::filesystem::path& path);

}  // namespace cfx
