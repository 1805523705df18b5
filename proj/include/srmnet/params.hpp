// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srmnet/autodiff.hpp"

namespace srmnet {

/// How a parameter tensor was (or will be) initialized.
struct ParamInit {
  enum class Kind { Uniform, Zero, CopyOf };
  Kind kind = Kind::Zero;
  double bound = 0.0;   // Uniform: samples from [-bound, bound]
  std::string source;   // CopyOf: name of the tensor this one duplicates
};

/// Named, ordered collection of trainable leaves.
template <typename T>
class ModelParams {
 public:
  struct Entry {
    std::string name;
    Var<T> var;
    ParamInit init;
  };

  Var<T>& add(std::string name, Tensor<T> value, ParamInit init = {}) {
    require(!index_.contains(name), ErrorCode::ShapeMismatch, "duplicate parameter " + name);
    index_.emplace(name, entries_.size());
    entries_.push_back({std::move(name), Var<T>::leaf(std::move(value), true), std::move(init)});
    return entries_.back().var;
  }

  bool contains(const std::string& name) const { return index_.contains(name); }

  const Var<T>& operator[](const std::string& name) const { return entries_[find(name)].var; }
  Var<T>& operator[](const std::string& name) { return entries_[find(name)].var; }

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }

  std::size_t total_elements() const {
    std::size_t total = 0;
    for (const auto& e : entries_) total += e.var.value().size();
    return total;
  }

  void zero_grad() {
    for (auto& e : entries_) e.var.zero_grad();
  }

  void set_all(T value) {
    for (auto& e : entries_) e.var.mutable_value().fill(value);
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    for (const auto& e : entries_) out.add(e.name, e.var.value().template cast<U>(), e.init);
    return out;
  }

  bool values_equal(const ModelParams& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (entries_[i].name != other.entries_[i].name ||
          !(entries_[i].var.value() == other.entries_[i].var.value())) {
        return false;
      }
    }
    return true;
  }

 private:
  std::size_t find(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), ErrorCode::TensorCountMismatch, "unknown parameter " + name);
    return it->second;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace srmnet
