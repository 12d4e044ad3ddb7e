#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "trajflow/array.hpp"

namespace trajflow {

// Named parameter arrays with stable insertion order. Order matters: it fixes
// RNG consumption during init and the blob layout in checkpoints.
class ParamSet {
public:
    void add(std::string name, Array value);

    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    Array& at(const std::string& name);
    const Array& at(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t total_elements() const;

    const std::vector<std::pair<std::string, Array>>& entries() const { return entries_; }
    std::vector<std::pair<std::string, Array>>& entries() { return entries_; }

private:
    std::vector<std::pair<std::string, Array>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace trajflow
