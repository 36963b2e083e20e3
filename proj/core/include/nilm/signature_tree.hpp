#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nilm/errors.hpp"
#include "nilm/signatures.hpp"

namespace nilm {

/// One appliance under the shared root. Each set is one complete
/// root-to-leaf path: form, alpha, gamma, beta, delta, label, then mu and tau.
struct ApplianceNode {
    std::string name;
    std::vector<SignatureSet> paths;  // sorted by (form, label)

    friend bool operator==(const ApplianceNode&, const ApplianceNode&) = default;
};

class SignatureTree {
public:
    SignatureTree() = default;

    /// Adds (or extends) an appliance. Paths are keyed by label; a label
    /// already present with different Gaussians throws std::invalid_argument.
    void add(const std::string& appliance, const std::vector<SignatureSet>& sets);

    [[nodiscard]] const std::vector<ApplianceNode>& appliances() const noexcept {
        return appliances_;
    }
    [[nodiscard]] const ApplianceNode* find(std::string_view appliance) const;
    [[nodiscard]] bool empty() const noexcept { return appliances_.empty(); }
    [[nodiscard]] std::size_t path_count() const noexcept;

    friend bool operator==(const SignatureTree&, const SignatureTree&) = default;

private:
    std::vector<ApplianceNode> appliances_;  // sorted by name
};

[[nodiscard]] SignatureTree build_tree(const std::string& appliance,
                                       const std::vector<SignatureSet>& sets);

struct ObservedTransition {
    WaveForm form = WaveForm::R;
    double dts = 0.0;
    double trs = 0.0;
    double dsp = 0.0;
    double tdt = 0.0;
};

struct TreeMatch {
    std::string appliance;
    TransitionLabel label;
    double log_score = 0.0;  // sum of log densities of alpha, gamma, beta, delta
    GaussianParam mu;
    GaussianParam tau;
};

/// Paths of the observed form, best first. Zero-std layers accept only an
/// exact value and reject the path otherwise.
[[nodiscard]] std::vector<TreeMatch> query_tree(const SignatureTree& tree,
                                                const ObservedTransition& observed);

inline constexpr std::string_view tree_format_tag = "nilm-signature-tree/1";

/// JSON document, one nesting level per tree layer.
[[nodiscard]] std::string serialize_tree(const SignatureTree& tree);
/// Throws ParseError naming the missing or malformed layer.
[[nodiscard]] SignatureTree deserialize_tree(std::string_view text);

}  // namespace nilm
