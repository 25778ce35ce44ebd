#include "cfx/catalog.hpp"

#include <sstream>

#include "cfx/errors.hpp"

namespace cfx {

namespace {

// Tab-separated: id, name, year, data, category, core idea, implementing generator.
constexpr std::string_view kTable = R"(wachter	Wachter et al.	2017	U/M	Optimization-based	Input-space loss minimization to induce class change	wachter
comte	CoMTE	2021	M	Optimization-based	Channel-wise counterfactual optimization for multivariate time series	comte
ts_tweaking	TS-Tweaking	2020	U	Optimization-based	Greedy optimization that tweaks shapelet-aligned segments	
tscf	TSCF	2024	U/M	Optimization-based	Custom input-space counterfactual optimization framework	tscf
moc	MOC	2020	U/M	Evolutionary	Multi-objective evolutionary counterfactual search	evo
tsevo	TSEvo	2022	U/M	Evolutionary	Evolutionary counterfactual explanations tailored to time series	evo
sub_space	Sub-SpaCE	2023	U	Evolutionary	Sparse evolutionary search over contiguous subsequences	evo
multi_space	Multi-SpaCE	2024	M	Evolutionary	Multi-objective subsequence-based CFs for multivariate time series	
native_guide	Native Guide	2021	U	Instance-based	Nearest unlike neighbor–guided subsequence replacement	native_guide
cels	CELS	2023	U	Instance-based	Saliency-guided counterfactual edits for univariate series	
m_cels	M-CELS	2024	M	Instance-based	Multivariate extension of saliency-guided CFs	
ab_cf	AB-CF	2023	M	Instance-based	Attention-guided counterfactual explanation framework	greedy_window
latent_cf	Latent-CF	2020	U/M	Latent space	Latent-space counterfactual baseline using autoencoders	latentcf
cgm	CGM	2021	U/M	Latent space	Conditional generative modeling for counterfactual explanations	
lasts	LASTS	2020	U/M	Latent space	Latent surrogate explanations for time series classifiers	
glacier	GLACIER	2024	U/M	Latent space	Locally constrained, realism-aware latent counterfactuals	
counts	CounTS	2023	U/M	Latent space	Structured generative CFs with interpretable latent variables	
sg_cf	SG-CF	2022	U/M	Segment-based	Shapelet-guided subsequence counterfactual explanations	
sets	SETS	2022	U/M	Segment-based	Efficient shapelet-based counterfactual generation	
discox	DisCOX	2024	U/M	Segment-based	Discord (anomalous segment) replacement for CFs	discord
cfwot	CFWoT	2024	M	Segment-based	Subsequence-based CFs without access to training data	
ts_cem	TS-CEM	2020	U/M	Segment-based	Time-series adaptation of CEM with contrastive temporal segments	
mg_cf	MG-CF	2022	U/M	Hybrid	Motif-guided counterfactuals combining segment and instance ideas	
sparce	SPARCE	2022	M	Hybrid	Structured sparsity for actionable counterfactual recourse	
terce	TeRCE	2022	M	Hybrid	Symbolic temporal-rule-based counterfactual explanations	
time_cf	Time-CF	2024	U/M	Hybrid	GAN-based counterfactuals guided by temporal shapelets	
)";

}  // namespace

std::string_view category_name(MethodCategory c) {
    switch (c) {
        case MethodCategory::optimization: return "Optimization-based";
        case MethodCategory::evolutionary: return "Evolutionary";
        case MethodCategory::instance: return "Instance-based";
        case MethodCategory::latent: return "Latent space";
        case MethodCategory::segment: return "Segment-based";
        case MethodCategory::hybrid: return "Hybrid";
    }
    return "";
}

MethodCategory parse_category(std::string_view name) {
    std::string key;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    for (auto c : {MethodCategory::optimization, MethodCategory::evolutionary, MethodCategory::instance,
                   MethodCategory::latent, MethodCategory::segment, MethodCategory::hybrid}) {
        std::string full;
        for (char ch : category_name(c)) {
            if (std::isalnum(static_cast<unsigned char>(ch))) full += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        if (key == full || (key.size() >= 4 && full.rfind(key, 0) == 0)) return c;
    }
    throw ConfigError("unknown category '" + std::string(name) + "'");
}

std::string_view data_kind_name(DataKind d) {
    switch (d) {
        case DataKind::univariate: return "U";
        case DataKind::multivariate: return "M";
        case DataKind::both: return "U/M";
    }
    return "";
}

std::vector<MethodEntry> parse_method_table(std::string_view text) {
    std::vector<MethodEntry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("id\t", 0) == 0) continue;
        std::vector<std::string> f;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, '\t')) f.push_back(field);
        if (f.size() == 6) f.emplace_back();
        if (f.size() != 7) throw FormatError("method table row needs 7 fields: " + line);
        MethodEntry e;
        e.id = f[0];
        e.name = f[1];
        e.year = std::stoi(f[2]);
        if (f[3] == "U") {
            e.data = DataKind::univariate;
        } else if (f[3] == "M") {
            e.data = DataKind::multivariate;
        } else if (f[3] == "U/M") {
            e.data = DataKind::both;
        } else {
            throw FormatError("bad data kind '" + f[3] + "'");
        }
        e.category = parse_category(f[4]);
        e.core_idea = f[5];
        e.implemented_by = f[6];
        out.push_back(std::move(e));
    }
    return out;
}

const std::vector<MethodEntry>& method_catalog() {
    static const std::vector<MethodEntry> entries = parse_method_table(kTable);
    return entries;
}

std::vector<MethodEntry> list_methods(std::optional<MethodCategory> filter) {
    std::vector<MethodEntry> out;
    for (const auto& e : method_catalog()) {
        if (!filter || e.category == *filter) out.push_back(e);
    }
    return out;
}

nlohmann::json to_json(const MethodEntry& e) {
    return {{"id", e.id},
            {"name", e.name},
            {"year", e.year},
            {"data", data_kind_name(e.data)},
            {"category", category_name(e.category)},
            {"core_idea", e.core_idea},
            {"implemented", e.implemented()},
            {"implemented_by", e.implemented() ? nlohmann::json(e.implemented_by) : nlohmann::json(nullptr)}};
}

}  // namespace cfx
