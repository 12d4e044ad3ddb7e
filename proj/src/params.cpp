#include "trajflow/params.hpp"

#include <utility>

#include "trajflow/errors.hpp"

namespace trajflow {

void ParamSet::add(std::string name, Array value) {
    if (index_.count(name)) throw UsageError("ParamSet: duplicate parameter '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(value));
}

Array& ParamSet::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("ParamSet: unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

const Array& ParamSet::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("ParamSet: unknown parameter '" + name + "'");
    return entries_[it->second].second;
}

std::size_t ParamSet::total_elements() const {
    std::size_t n = 0;
    for (const auto& [name, a] : entries_) n += a.size();
    return n;
}

}  // namespace trajflow
