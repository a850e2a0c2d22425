#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sarlab/nn/tensor.hpp"
#include "sarlab/rng.hpp"

namespace sarlab::nn {

// Parameter ownership groups; every parameter is updated by exactly one
// term-routing rule, so group membership is part of the training contract.
enum class Group {
    Feature,        // theta_F: backbone + CRM
    Classifier,     // theta_Y
    Discriminator,  // theta_D
    MaskEncoder,    // theta_M
};

inline const char* to_string(Group g) {
    switch (g) {
        case Group::Feature: return "theta_F";
        case Group::Classifier: return "theta_Y";
        case Group::Discriminator: return "theta_D";
        case Group::MaskEncoder: return "theta_M";
    }
    return "theta_F";
}

inline Group group_from_string(const std::string& s) {
    if (s == "theta_F") return Group::Feature;
    if (s == "theta_Y") return Group::Classifier;
    if (s == "theta_D") return Group::Discriminator;
    if (s == "theta_M") return Group::MaskEncoder;
    throw ArgumentError("unknown parameter group: " + s);
}

template <typename T>
struct Param {
    std::string name;
    Shape4 shape;
    Group group = Group::Feature;
    bool trainable = true;  // false: BN running statistics (serialized, not optimized)
    std::vector<T> value;
    std::vector<T> grad;
    std::vector<T> adam_m, adam_v;

    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
class ParamStore {
public:
    Param<T>& add(const std::string& name, Shape4 shape, Group group, bool trainable = true) {
        if (by_name_.count(name)) throw ContractError("duplicate parameter name: " + name);
        auto p = std::make_unique<Param<T>>();
        p->name = name;
        p->shape = shape;
        p->group = group;
        p->trainable = trainable;
        p->value.assign(shape.count(), T(0));
        p->grad.assign(shape.count(), T(0));
        if (trainable) {
            p->adam_m.assign(shape.count(), T(0));
            p->adam_v.assign(shape.count(), T(0));
        }
        by_name_[name] = p.get();
        params_.push_back(std::move(p));
        return *params_.back();
    }

    Param<T>* find(const std::string& name) {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : it->second;
    }

    std::vector<Param<T>*> all() {
        std::vector<Param<T>*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }

    std::vector<Param<T>*> group(Group g) {
        std::vector<Param<T>*> out;
        for (auto& p : params_)
            if (p->group == g) out.push_back(p.get());
        return out;
    }

    size_t total_count() const {
        size_t n = 0;
        for (auto& p : params_) n += p->value.size();
        return n;
    }

private:
    std::vector<std::unique_ptr<Param<T>>> params_;
    std::map<std::string, Param<T>*> by_name_;
};

// Bias-corrected adaptive-moment update over one store.
template <typename T>
void adam_step(ParamStore<T>& store, double lr, int64_t t, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (Param<T>* p : store.all()) {
        if (!p->trainable) continue;
        for (size_t i = 0; i < p->value.size(); ++i) {
            const double g = static_cast<double>(p->grad[i]);
            const double m = beta1 * static_cast<double>(p->adam_m[i]) + (1.0 - beta1) * g;
            const double v = beta2 * static_cast<double>(p->adam_v[i]) + (1.0 - beta2) * g * g;
            p->adam_m[i] = static_cast<T>(m);
            p->adam_v[i] = static_cast<T>(v);
            p->value[i] -= static_cast<T>(lr * (m / bc1) / (std::sqrt(v / bc2) + eps));
        }
        p->zero_grad();
    }
}

}  // namespace sarlab::nn
