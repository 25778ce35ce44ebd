#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cfx {

enum class MethodCategory { optimization, evolutionary, instance, latent, segment, hybrid };
enum class DataKind { univariate, multivariate, both };

std::string_view category_name(MethodCategory c);
/// Accepts the display name or a prefix of it, ignoring case and punctuation ("latent", "Instance-based").
MethodCategory parse_category(std::string_view name);
std::string_view data_kind_name(DataKind d);

/// One published method from the survey's overview table.
struct MethodEntry {
    std::string id;
    std::string name;
    int year = 0;
    DataKind data = DataKind::both;
    MethodCategory category = MethodCategory::optimization;
    std::string core_idea;
    /// Generator id realizing the method's core idea here; empty if none.
    std::string implemented_by;

    bool implemented() const { return !implemented_by.empty(); }
};

/// Parses the tab-separated table (header line optional).
std::vector<MethodEntry> parse_method_table(std::string_view text);

/// The embedded table, in publication-table order.
const std::vector<MethodEntry>& method_catalog();
std::vector<MethodEntry> list_methods(std::optional<MethodCategory> filter = std::nullopt);

nlohmann::json to_json(const MethodEntry& e);

}  // namespace cfx
