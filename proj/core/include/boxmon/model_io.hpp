#pragma once

#include <filesystem>
#include <iosfwd>

#include "boxmon/nn.hpp"

namespace boxmon {

// Text model file, one token group per line (see docs/file-formats.md):
//
//   boxmon-model 1
//   labels <n> <label_0> ... <label_n-1>
//   layers <L>
//   layer <in_dim> <out_dim> <relu|identity>      } repeated L times
//   <out_dim lines of in_dim weights, row-major>  }
//   bias <out_dim values>                         }
//
// Doubles are written in shortest round-trip form, so save/load is lossless.

void save_model(const DenseNetwork& net, std::ostream& out);
void save_model(const DenseNetwork& net, const std::filesystem::path& path);

DenseNetwork load_model(std::istream& in, const std::string& source_name = "<stream>");
DenseNetwork load_model(const std::filesystem::path& path);

}  // namespace boxmon
