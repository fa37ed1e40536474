#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "itere/embedding.hpp"

namespace itere {

// Layout: "ITERE-CKPT v1 d n_s n_b |E| |R|\n", then little-endian float64 arrays
// (entity table, relation table, entity m, relation m, entity v, relation v), then the
// Adam step count and the completed pipeline iteration as little-endian uint64.

struct Checkpoint {
  EmbeddingModel model;
  std::uint64_t iteration = 0;
};

struct ExpectedShape {
  BlockLayout layout;
  std::optional<std::size_t> num_entities;
  std::optional<std::size_t> num_relations;
};

void save_checkpoint(std::ostream& out, const EmbeddingModel& model, std::uint64_t iteration);
void save_checkpoint(const std::filesystem::path& path, const EmbeddingModel& model, std::uint64_t iteration);

/// Throws Error on a bad header, a truncated body, or a shape that differs from `expected`.
Checkpoint load_checkpoint(std::istream& in, const std::optional<ExpectedShape>& expected = std::nullopt);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ExpectedShape>& expected = std::nullopt);

}  // namespace itere
