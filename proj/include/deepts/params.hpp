#pragma once

#include <string>
#include <vector>

#include "deepts/errors.hpp"
#include "deepts/tensor.hpp"

namespace deepts {

/// One named parameter: value tensor plus a gradient tensor of the same
/// shape. `penalizable` marks weight matrices/kernels; biases are excluded
/// from L1/L2 penalties.
struct ParamEntry {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
    bool penalizable = false;
};

/// Deep copy of parameter values in registration order.
using ParamSnapshot = std::vector<Tensor>;

/// Ordered collection of non-owning references to layer-owned parameter and
/// gradient tensors. Iteration order is registration order, which fixes the
/// reduction order of penalties and optimizer updates.
class ParamSet {
public:
    void add(std::string name, Tensor* value, Tensor* grad, bool penalizable) {
        if (value == nullptr || grad == nullptr) throw ValueError("ParamSet::add: null tensor");
        if (!value->same_shape(*grad)) {
            throw ShapeError("ParamSet::add: value/grad shape mismatch for " + name);
        }
        for (const auto& e : entries_) {
            if (e.name == name) throw ValueError("ParamSet::add: duplicate name " + name);
        }
        entries_.push_back(ParamEntry{std::move(name), value, grad, penalizable});
    }

    std::size_t size() const { return entries_.size(); }
    const ParamEntry& entry(std::size_t i) const { return entries_.at(i); }
    const std::vector<ParamEntry>& entries() const { return entries_; }

    Tensor& value(std::size_t i) { return *entries_.at(i).value; }
    const Tensor& value(std::size_t i) const { return *entries_.at(i).value; }
    Tensor& grad(std::size_t i) { return *entries_.at(i).grad; }
    const Tensor& grad(std::size_t i) const { return *entries_.at(i).grad; }

    /// Index of a named entry, or throws.
    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].name == name) return i;
        }
        throw ValueError("ParamSet: no entry named " + name);
    }

    bool contains(const std::string& name) const {
        for (const auto& e : entries_) {
            if (e.name == name) return true;
        }
        return false;
    }

    void zero_grads() {
        for (auto& e : entries_) {
            double* p = e.grad->data();
            for (std::size_t i = 0; i < e.grad->size(); ++i) p[i] = 0.0;
        }
    }

    /// Total scalar parameter count.
    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.value->size();
        return n;
    }

    ParamSnapshot snapshot() const {
        ParamSnapshot s;
        s.reserve(entries_.size());
        for (const auto& e : entries_) s.push_back(*e.value);
        return s;
    }

    void restore(const ParamSnapshot& s) {
        if (s.size() != entries_.size()) throw ValueError("ParamSet::restore: entry count mismatch");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].same_shape(*entries_[i].value)) {
                throw ShapeError("ParamSet::restore: shape mismatch at " + entries_[i].name);
            }
            *entries_[i].value = s[i];
        }
    }

private:
    std::vector<ParamEntry> entries_;
};

} // namespace deepts
