#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dacer/tensor.hpp"

namespace dacer {

// Checkpoint file layout (documented so any reader can reimplement it):
//
//   DACER-CKPT 1\n
//   meta <key> <value>\n          (0 or more; value runs to end of line)
//   tensor <name> <d0> [<d1>]\n   (1 or more, in storage order)
//   end\n
//   <raw little-endian float64 payload, tensors concatenated in header order>
//
// The text header is ASCII; the payload length must equal the sum of the
// declared tensor sizes times 8 bytes.

struct Checkpoint {
    struct Entry {
        std::vector<int> shape;
        std::vector<double> values;
    };

    std::vector<std::pair<std::string, std::string>> meta; // insertion order
    std::vector<std::string> tensor_order;
    std::map<std::string, Entry> tensors;

    bool has_meta(const std::string& key) const;
    // Missing key -> LoadError.
    const std::string& meta_value(const std::string& key) const;

    // Copy a named tensor's values into `dst`; missing name or shape mismatch
    // -> LoadError naming the tensor.
    void load_into(const std::string& name, Tensor& dst) const;
};

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& meta,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors);

Checkpoint load_checkpoint(const std::string& path);

} // namespace dacer
