#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "deepts/errors.hpp"
#include "deepts/params.hpp"

namespace deepts {

/// Text checkpoint: named tensors with shapes, values in C hexfloat so the
/// round-trip is bit-exact. Format:
///   deepts-checkpoint-v1
///   tensors <count>
///   <name> <rank> <dim0> <dim1> ...
///   <hexfloat values, space separated, one line per tensor>
inline void save_checkpoint(const ParamSet& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << "deepts-checkpoint-v1\n";
    out << "tensors " << params.size() << "\n";
    char buf[48];
    for (const auto& e : params.entries()) {
        out << e.name << ' ' << e.value->rank();
        for (std::size_t d : e.value->shape()) out << ' ' << d;
        out << '\n';
        for (std::size_t i = 0; i < e.value->size(); ++i) {
            std::snprintf(buf, sizeof buf, "%a", (*e.value)[i]);
            if (i) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

/// Loads values into an existing ParamSet; names and shapes must match the
/// registered entries exactly.
inline void load_checkpoint(ParamSet& params, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "deepts-checkpoint-v1") {
        throw IoError("not a deepts checkpoint: " + path);
    }
    std::size_t count = 0;
    {
        std::string word;
        if (!(in >> word >> count) || word != "tensors") {
            throw IoError("checkpoint header corrupt: " + path);
        }
    }
    if (count != params.size()) {
        throw IoError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                      std::to_string(params.size()));
    }
    for (std::size_t t = 0; t < count; ++t) {
        std::string name;
        std::size_t rank = 0;
        if (!(in >> name >> rank)) throw IoError("checkpoint truncated at tensor " + std::to_string(t));
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) {
            if (!(in >> d)) throw IoError("checkpoint shape truncated for " + name);
        }
        const std::size_t idx = params.index_of(name);
        Tensor& dst = params.value(idx);
        if (dst.shape() != shape) throw IoError("checkpoint shape mismatch for " + name);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            std::string tok;
            if (!(in >> tok)) throw IoError("checkpoint values truncated for " + name);
            char* end = nullptr;
            dst[i] = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str()) throw IoError("checkpoint value corrupt in " + name);
        }
    }
}

} // namespace deepts
