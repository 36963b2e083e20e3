#include "nilm/signature_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

namespace nilm {

namespace {

bool same_path_key(const SignatureSet& a, const SignatureSet& b) {
    return a.label == b.label;
}

bool path_less(const SignatureSet& a, const SignatureSet& b) {
    if (a.form != b.form) {
        return a.form < b.form;
    }
    return a.label < b.label;
}

}  // namespace

void SignatureTree::add(const std::string& appliance, const std::vector<SignatureSet>& sets) {
    if (appliance.empty()) {
        throw std::invalid_argument("signature tree: appliance name is empty");
    }
    auto it = std::lower_bound(appliances_.begin(), appliances_.end(), appliance,
                               [](const ApplianceNode& n, const std::string& s) { return n.name < s; });
    if (it == appliances_.end() || it->name != appliance) {
        it = appliances_.insert(it, ApplianceNode{appliance, {}});
    }
    auto& paths = it->paths;
    for (const auto& s : sets) {
        for (const auto& g : {s.alpha, s.gamma, s.beta, s.delta, s.mu, s.tau}) {
            if (!std::isfinite(g.mean) || !std::isfinite(g.std) || g.std < 0.0 || g.n < 1) {
                throw std::invalid_argument("signature tree: incomplete or invalid Gaussian in '" +
                                            appliance + "'");
            }
        }
        const auto dup = std::find_if(paths.begin(), paths.end(),
                                      [&](const SignatureSet& p) { return same_path_key(p, s); });
        if (dup != paths.end()) {
            if (!(*dup == s)) {
                throw std::invalid_argument("signature tree: conflicting duplicate label " +
                                            std::to_string(s.label.from) + "->" +
                                            std::to_string(s.label.to) + " in '" + appliance +
                                            "'");
            }
            continue;
        }
        paths.push_back(s);
    }
    std::sort(paths.begin(), paths.end(), path_less);
}

const ApplianceNode* SignatureTree::find(std::string_view appliance) const {
    for (const auto& a : appliances_) {
        if (a.name == appliance) {
            return &a;
        }
    }
    return nullptr;
}

std::size_t SignatureTree::path_count() const noexcept {
    std::size_t n = 0;
    for (const auto& a : appliances_) {
        n += a.paths.size();
    }
    return n;
}

SignatureTree build_tree(const std::string& appliance, const std::vector<SignatureSet>& sets) {
    SignatureTree t;
    t.add(appliance, sets);
    return t;
}

namespace {

// log N(x; mean, std); zero std accepts an exact match only.
double log_density(const GaussianParam& g, double x) {
    if (g.std == 0.0) {
        const double tol = 1e-9 * std::max(1.0, std::abs(g.mean));
        return std::abs(x - g.mean) <= tol ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const double z = (x - g.mean) / g.std;
    return -0.5 * z * z - std::log(g.std) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

std::vector<TreeMatch> query_tree(const SignatureTree& tree, const ObservedTransition& obs) {
    std::vector<TreeMatch> out;
    for (const auto& app : tree.appliances()) {
        for (const auto& p : app.paths) {
            if (p.form != obs.form) {
                continue;
            }
            const double score = log_density(p.alpha, obs.dts) + log_density(p.gamma, obs.trs) +
                                 log_density(p.beta, obs.dsp) + log_density(p.delta, obs.tdt);
            if (std::isinf(score)) {
                continue;
            }
            out.push_back({app.name, p.label, score, p.mu, p.tau});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const TreeMatch& a, const TreeMatch& b) {
        return a.log_score > b.log_score;
    });
    return out;
}

// --- persistence ---------------------------------------------------------

namespace {

using nlohmann::json;

json gaussian_json(const GaussianParam& g) {
    return json{{"mean", g.mean}, {"std", g.std}, {"n", g.n}};
}

[[noreturn]] void fail_layer(const std::string& where, const std::string& layer,
                             const std::string& what) {
    throw ParseError(where + ": " + what + " layer '" + layer + "'", 0, layer);
}

GaussianParam read_gaussian(const json& node, const std::string& where, const std::string& layer) {
    if (!node.is_object()) {
        fail_layer(where, layer, "malformed Gaussian in");
    }
    const auto field = [&](const char* key) -> const json& {
        const auto it = node.find(key);
        if (it == node.end() || !it->is_number()) {
            fail_layer(where, layer, std::string("missing or non-numeric '") + key + "' in");
        }
        return *it;
    };
    GaussianParam g;
    g.mean = field("mean").get<double>();
    g.std = field("std").get<double>();
    const auto& n = field("n");
    if (!n.is_number_unsigned() && !(n.is_number_integer() && n.get<long long>() >= 0)) {
        fail_layer(where, layer, "non-integer 'n' in");
    }
    g.n = n.get<std::size_t>();
    if (g.std < 0.0 || g.n < 1) {
        fail_layer(where, layer, "invalid Gaussian in");
    }
    return g;
}

GaussianParam layer_gaussian(const json& node, const std::string& where, const std::string& layer) {
    if (!node.is_object() || !node.contains("gaussian")) {
        fail_layer(where, layer, "missing Gaussian in");
    }
    return read_gaussian(node["gaussian"], where, layer);
}

// Children of a layer are stored under the layer's name as an array.
const json& children(const json& node, const std::string& where, const std::string& layer) {
    const auto it = node.find(layer);
    if (!node.is_object() || it == node.end()) {
        fail_layer(where, layer, "missing");
    }
    if (!it->is_array() || it->empty()) {
        fail_layer(where, layer, "empty or non-array");
    }
    return *it;
}

std::string child_path(const std::string& where, const std::string& layer, std::size_t i) {
    return where + "." + layer + "[" + std::to_string(i) + "]";
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

std::string serialize_tree(const SignatureTree& tree) {
    json apps = json::array();
    for (const auto& app : tree.appliances()) {
        json forms = json::array();
        for (WaveForm form : {WaveForm::R, WaveForm::D}) {
            json alphas = json::array();
            for (const auto& p : app.paths) {
                if (p.form != form) {
                    continue;
                }
                json label{{"from", p.label.from}, {"to", p.label.to},
                           {"mu", gaussian_json(p.mu)}, {"tau", gaussian_json(p.tau)}};
                json delta{{"gaussian", gaussian_json(p.delta)}, {"label", json::array({label})}};
                json beta{{"gaussian", gaussian_json(p.beta)}, {"delta", json::array({delta})}};
                json gamma{{"gaussian", gaussian_json(p.gamma)}, {"beta", json::array({beta})}};
                alphas.push_back(
                    json{{"gaussian", gaussian_json(p.alpha)}, {"gamma", json::array({gamma})}});
            }
            if (!alphas.empty()) {
                forms.push_back(json{{"form", std::string(to_string(form))}, {"alpha", alphas}});
            }
        }
        apps.push_back(json{{"name", app.name}, {"forms", forms}});
    }
    json doc{{"format", std::string(tree_format_tag)}, {"appliances", apps}};
    return doc.dump(2) + "\n";
}

SignatureTree deserialize_tree(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed tree document: ") + e.what(),
                         line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!doc.is_object()) {
        throw ParseError("tree document is not an object");
    }
    const auto tag = doc.find("format");
    if (tag == doc.end() || !tag->is_string() || tag->get<std::string>() != tree_format_tag) {
        throw ParseError("unsupported or missing format tag", 0, "format");
    }
    const auto apps = doc.find("appliances");
    if (apps == doc.end() || !apps->is_array()) {
        throw ParseError("missing 'appliances' array", 0, "appliances");
    }

    SignatureTree tree;
    for (std::size_t ai = 0; ai < apps->size(); ++ai) {
        const json& app = (*apps)[ai];
        const std::string where = "appliances[" + std::to_string(ai) + "]";
        if (!app.is_object() || !app.contains("name") || !app["name"].is_string()) {
            throw ParseError(where + ": missing appliance name", 0, "name");
        }
        const std::string name = app["name"].get<std::string>();
        std::vector<SignatureSet> sets;
        const auto forms_it = app.find("forms");
        if (forms_it == app.end() || !forms_it->is_array()) {
            throw ParseError(where + ": missing layer 'forms'", 0, "forms");
        }
        for (std::size_t fi = 0; fi < forms_it->size(); ++fi) {
            const json& fnode = (*forms_it)[fi];
            const std::string fw = child_path(where, "forms", fi);
            const auto fv = fnode.find("form");
            std::optional<WaveForm> form;
            if (fv != fnode.end() && fv->is_string()) {
                form = parse_waveform(fv->get<std::string>());
            }
            if (!form) {
                fail_layer(fw, "form", "missing or invalid");
            }
            const json& alphas = children(fnode, fw, "alpha");
            for (std::size_t i1 = 0; i1 < alphas.size(); ++i1) {
                const std::string w1 = child_path(fw, "alpha", i1);
                const GaussianParam alpha = layer_gaussian(alphas[i1], w1, "alpha");
                const json& gammas = children(alphas[i1], w1, "gamma");
                for (std::size_t i2 = 0; i2 < gammas.size(); ++i2) {
                    const std::string w2 = child_path(w1, "gamma", i2);
                    const GaussianParam gamma = layer_gaussian(gammas[i2], w2, "gamma");
                    const json& betas = children(gammas[i2], w2, "beta");
                    for (std::size_t i3 = 0; i3 < betas.size(); ++i3) {
                        const std::string w3 = child_path(w2, "beta", i3);
                        const GaussianParam beta = layer_gaussian(betas[i3], w3, "beta");
                        const json& deltas = children(betas[i3], w3, "delta");
                        for (std::size_t i4 = 0; i4 < deltas.size(); ++i4) {
                            const std::string w4 = child_path(w3, "delta", i4);
                            const GaussianParam delta = layer_gaussian(deltas[i4], w4, "delta");
                            const json& labels = children(deltas[i4], w4, "label");
                            for (std::size_t i5 = 0; i5 < labels.size(); ++i5) {
                                const std::string w5 = child_path(w4, "label", i5);
                                const json& ln = labels[i5];
                                if (!ln.is_object() || !ln.contains("from") || !ln.contains("to") ||
                                    !ln["from"].is_number_integer() || !ln["to"].is_number_integer()) {
                                    fail_layer(w5, "label", "malformed");
                                }
                                if (!ln.contains("mu")) {
                                    fail_layer(w5, "mu", "missing");
                                }
                                if (!ln.contains("tau")) {
                                    fail_layer(w5, "tau", "missing");
                                }
                                SignatureSet s;
                                s.form = *form;
                                s.alpha = alpha;
                                s.gamma = gamma;
                                s.beta = beta;
                                s.delta = delta;
                                s.label = {ln["from"].get<int>(), ln["to"].get<int>()};
                                s.mu = read_gaussian(ln["mu"], w5, "mu");
                                s.tau = read_gaussian(ln["tau"], w5, "tau");
                                sets.push_back(s);
                            }
                        }
                    }
                }
            }
        }
        try {
            tree.add(name, sets);
        } catch (const std::invalid_argument& e) {
            throw ParseError(where + ": " + e.what(), 0, "label");
        }
    }
    return tree;
}

}  // namespace nilm
