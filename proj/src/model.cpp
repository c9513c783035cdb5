#include "mvsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvsde {

namespace {

void require_dims(const Model& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim_state)
        throw InvalidInputError("model '" + model.name + "': state has dimension "
                                + std::to_string(x.size()) + ", expected " + std::to_string(model.dim_state));
}

void require_measure(const Model& model, const EmpiricalMeasure& mu) {
    if (mu.dim() != model.dim_state)
        throw InvalidInputError("model '" + model.name + "': measure lives in dimension "
                                + std::to_string(mu.dim()) + ", expected " + std::to_string(model.dim_state));
}

} // namespace

std::vector<double> eval_drift(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu) {
    require_dims(model, x);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_state));
    model.drift(t, x, mu, out);
    return out;
}

std::vector<double> eval_diffusion(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu) {
    require_dims(model, x);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_state * model.dim_noise));
    model.diffusion(t, x, mu, out);
    return out;
}

std::vector<double> eval_grad_x_drift(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu) {
    require_dims(model, x);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_state * model.dim_state));
    model.grad_x_drift(t, x, mu, out);
    return out;
}

std::vector<double> eval_grad_x_diffusion(const Model& model, double t, std::span<const double> x, const EmpiricalMeasure& mu) {
    require_dims(model, x);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_noise * model.dim_state * model.dim_state));
    model.grad_x_diffusion(t, x, mu, out);
    return out;
}

std::vector<double> eval_lions_drift(const Model& model, double t, std::span<const double> x,
                                     const EmpiricalMeasure& mu, std::span<const double> v) {
    require_dims(model, x);
    require_dims(model, v);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_state * model.dim_state));
    model.lions_drift(t, x, mu, v, out);
    return out;
}

std::vector<double> eval_lions_diffusion(const Model& model, double t, std::span<const double> x,
                                         const EmpiricalMeasure& mu, std::span<const double> v) {
    require_dims(model, x);
    require_dims(model, v);
    require_measure(model, mu);
    std::vector<double> out(static_cast<std::size_t>(model.dim_noise * model.dim_state * model.dim_state));
    model.lions_diffusion(t, x, mu, v, out);
    return out;
}

Model make_mean_field_ou(double a, double kappa, double sigma0) {
    Model m;
    m.name = "MeanFieldOU";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.regularity = Regularity::GloballyLipschitz;
    m.lions_constant_in_v = true;
    m.drift = [a, kappa](double, std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
        out[0] = -a * x[0] + kappa * mu.mean()[0];
    };
    m.diffusion = [sigma0](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = sigma0;
    };
    m.grad_x_drift = [a](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = -a;
    };
    m.grad_x_diffusion = [](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = 0.0;
    };
    m.lions_drift = [kappa](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = kappa;
    };
    m.lions_diffusion = [](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    return m;
}

Model make_double_well(double kappa, double sigma0) {
    Model m;
    m.name = "DoubleWell";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.regularity = Regularity::OneSidedLipschitz;
    m.lions_constant_in_v = true;
    m.drift = [kappa](double, std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
        out[0] = x[0] - x[0] * x[0] * x[0] + kappa * (mu.mean()[0] - x[0]);
    };
    m.diffusion = [sigma0](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = sigma0;
    };
    m.grad_x_drift = [kappa](double, std::span<const double> x, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = 1.0 - 3.0 * x[0] * x[0] - kappa;
    };
    m.grad_x_diffusion = [](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = 0.0;
    };
    m.lions_drift = [kappa](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = kappa;
    };
    m.lions_diffusion = [](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    return m;
}

Model make_scalar_state_diffusion(double a, double kappa, double sigma1, double sigma2) {
    Model m;
    m.name = "ScalarStateDiffusion";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.regularity = Regularity::GloballyLipschitz;
    m.lions_constant_in_v = true;
    m.drift = [a, kappa](double, std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
        out[0] = -a * x[0] + kappa * mu.mean()[0];
    };
    m.diffusion = [sigma1, sigma2](double, std::span<const double> x, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = sigma1 + sigma2 * std::tanh(x[0]);
    };
    m.grad_x_drift = [a](double, std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = -a;
    };
    m.grad_x_diffusion = [sigma2](double, std::span<const double> x, const EmpiricalMeasure&, std::span<double> out) {
        double th = std::tanh(x[0]);
        out[0] = sigma2 * (1.0 - th * th);
    };
    m.lions_drift = [kappa](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = kappa;
    };
    m.lions_diffusion = [](double, std::span<const double>, const EmpiricalMeasure&, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    return m;
}

namespace {

struct RegistryEntry {
    std::map<std::string, double> defaults;
    Model (*build)(const std::map<std::string, double>&);
};

const std::map<std::string, RegistryEntry>& registry() {
    static const std::map<std::string, RegistryEntry> reg = {
        {"MeanFieldOU",
         {{{"a", 1.0}, {"kappa", 0.5}, {"sigma0", 0.3}},
          [](const std::map<std::string, double>& p) {
              return make_mean_field_ou(p.at("a"), p.at("kappa"), p.at("sigma0"));
          }}},
        {"DoubleWell",
         {{{"kappa", 0.5}, {"sigma0", 0.3}},
          [](const std::map<std::string, double>& p) {
              return make_double_well(p.at("kappa"), p.at("sigma0"));
          }}},
        {"ScalarStateDiffusion",
         {{{"a", 1.0}, {"kappa", 0.5}, {"sigma1", 0.2}, {"sigma2", 0.1}},
          [](const std::map<std::string, double>& p) {
              return make_scalar_state_diffusion(p.at("a"), p.at("kappa"), p.at("sigma1"), p.at("sigma2"));
          }}},
    };
    return reg;
}

} // namespace

Model make_model(const std::string& name, const std::map<std::string, double>& params) {
    auto it = registry().find(name);
    if (it == registry().end()) {
        std::ostringstream msg;
        msg << "unknown model '" << name << "'; registered models:";
        for (const auto& [known, entry] : registry()) {
            (void)entry;
            msg << ' ' << known;
        }
        throw InvalidInputError(msg.str());
    }
    std::map<std::string, double> merged = it->second.defaults;
    for (const auto& [key, value] : params) {
        auto slot = merged.find(key);
        if (slot == merged.end()) {
            std::ostringstream msg;
            msg << "model '" << name << "' has no parameter '" << key << "'; valid parameters:";
            for (const auto& [known, unused] : it->second.defaults) {
                (void)unused;
                msg << ' ' << known;
            }
            throw InvalidInputError(msg.str());
        }
        slot->second = value;
    }
    return it->second.build(merged);
}

std::vector<std::string> model_names() {
    std::vector<std::string> names;
    for (const auto& [name, entry] : registry()) {
        (void)entry;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::map<std::string, double> model_default_params(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw InvalidInputError("unknown model '" + name + "'");
    return it->second.defaults;
}

} // namespace mvsde
