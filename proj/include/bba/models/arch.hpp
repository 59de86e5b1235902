#pragma once

#include <string>
#include <vector>

namespace bba::models {

enum class LayerKind : int { Dense = 0, ReLU = 1, Sigmoid = 2, ConvMax = 3, Softmax = 4 };

/// One layer of a network stack. `units` is the output unit count for Dense
/// and the filter count for ConvMax (2x2 kernels followed by 2x2 max-pool);
/// it is unused for the elementwise kinds.
struct LayerSpec {
  LayerKind kind;
  int units = 0;
  bool operator==(const LayerSpec&) const = default;
};

struct ArchitectureSpec {
  std::string id;
  int in_dim = 0;
  int out_dim = 0;
  // Input image geometry, needed by ConvMax. Flat inputs use 1 x in_dim x 1.
  int in_rows = 1;
  int in_cols = 0;
  int in_channels = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const ArchitectureSpec&) const = default;
};

/// The named architecture registry (ids "A" through "M").
const std::vector<ArchitectureSpec>& architecture_registry();

/// Look up a registry architecture by id; throws ConfigError if unknown.
ArchitectureSpec registry_architecture(const std::string& id);

/// Builds an ArchitectureSpec from either a registry id ("A".."M") or a
/// dash-separated layer stack ("cm8-cm16-d64r", tokens: cmN conv+maxpool,
/// dN dense, dNr dense+relu, dNs dense+sigmoid). A final "d<classes>" +
/// softmax head is appended when the stack does not end in a softmax.
/// Input geometry and class count come from the caller (usually the dataset).
ArchitectureSpec make_architecture(const std::string& spec, int in_rows, int in_cols,
                                   int in_channels, int classes);

/// Single dense + softmax stack (multinomial logistic regression).
ArchitectureSpec logistic_architecture(int in_dim, int classes);

}  // namespace bba::models
