#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binpack/geometry.hpp"

namespace binpack {

enum class GeneratorKind { RS, CUT1, CUT2 };

const char* to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

struct GeneratorConfig {
  Dims3 container{10, 10, 10};
  int dim_min = 2;
  int dim_max = 5;
  std::uint64_t seed = 0;
  GeneratorKind kind = GeneratorKind::RS;
  int stream_length = 80;  // RS only

  void validate() const;  // throws BadConfig
};

/// One item stream. CUT streams keep the originating tiling so the exact
/// packing they were cut from stays replayable.
struct ItemSequence {
  std::uint64_t seed = 0;
  GeneratorKind kind = GeneratorKind::RS;
  std::vector<Dims3> items;
  std::vector<Placement> tiling;  // empty for RS; order matches items

  friend bool operator==(const ItemSequence&, const ItemSequence&) = default;
};

/// Random-sampling stream: each dimension drawn independently and uniformly
/// from [dim_min, dim_max].
ItemSequence gen_rs(const GeneratorConfig& cfg);

/// Recursive guillotine cutting of the container. Every piece with a
/// dimension above dim_max is split along its longest over-limit axis; the
/// cut offset is uniform with at least dim_min left on each side when the
/// piece is long enough, else the midpoint. The result exactly partitions
/// the container.
std::vector<Placement> cut_container(const GeneratorConfig& cfg);

/// Bottom-first ordering of a tiling: ascending z, ties by (x, y), then by
/// creation index.
ItemSequence order_cut1(const std::vector<Placement>& tiling,
                        const GeneratorConfig& cfg);

/// Dependency ordering of a tiling: an item may be emitted only after every
/// piece directly supporting it; among emittable items the choice is
/// uniform, seeded. Throws CyclicDependency if no progress is possible.
ItemSequence order_cut2(const std::vector<Placement>& tiling,
                        const GeneratorConfig& cfg, std::uint64_t order_seed);

/// deps[i] lists the pieces item i rests directly on (top face touching
/// bottom face with overlapping footprints).
std::vector<std::vector<int>> support_edges(const std::vector<Placement>& tiling);

/// Seeded uniform-random topological order; deps[i] must come before i.
std::vector<int> topological_shuffle(const std::vector<std::vector<int>>& deps,
                                     std::uint64_t seed);

/// Convenience: full generation for any kind.
ItemSequence generate_sequence(const GeneratorConfig& cfg);

/// Dataset file: line 1 is a versioned header with the generator config,
/// then one record per sequence. Round-trips bit-exactly.
void save_sequences(const std::vector<ItemSequence>& seqs,
                    const GeneratorConfig& cfg, const std::string& path);

struct DatasetFile {
  GeneratorConfig config;
  std::vector<ItemSequence> sequences;
};

DatasetFile load_sequences(const std::string& path);

}  // namespace binpack
