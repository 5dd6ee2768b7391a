#include "binpack/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "binpack/errors.hpp"
#include "binpack/rng.hpp"

namespace binpack {

using nlohmann::json;

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::RS: return "rs";
    case GeneratorKind::CUT1: return "cut1";
    case GeneratorKind::CUT2: return "cut2";
  }
  throw BadConfig("unknown generator kind");
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  if (name == "rs") return GeneratorKind::RS;
  if (name == "cut1") return GeneratorKind::CUT1;
  if (name == "cut2") return GeneratorKind::CUT2;
  throw BadConfig("unknown generator kind: " + name);
}

void GeneratorConfig::validate() const {
  if (!container.valid()) throw BadConfig("container dimensions must be positive");
  const int cap = std::min({container.l, container.w, container.h});
  if (dim_min < 1 || dim_min > dim_max || dim_max > cap) {
    throw BadConfig("need 1 <= dim_min <= dim_max <= min container dimension");
  }
  if (kind == GeneratorKind::RS && stream_length < 1) {
    throw BadConfig("stream_length must be positive");
  }
}

ItemSequence gen_rs(const GeneratorConfig& cfg) {
  cfg.validate();
  RandomEngine rng(cfg.seed);
  ItemSequence seq;
  seq.seed = cfg.seed;
  seq.kind = GeneratorKind::RS;
  seq.items.reserve(static_cast<std::size_t>(cfg.stream_length));
  for (int i = 0; i < cfg.stream_length; ++i) {
    Dims3 d;
    d.l = static_cast<int>(rng.uniform_int(cfg.dim_min, cfg.dim_max));
    d.w = static_cast<int>(rng.uniform_int(cfg.dim_min, cfg.dim_max));
    d.h = static_cast<int>(rng.uniform_int(cfg.dim_min, cfg.dim_max));
    seq.items.push_back(d);
  }
  return seq;
}

namespace {

struct Piece {
  int x, y, z;
  Dims3 d;
};

int dim_of(const Dims3& d, int axis) {
  return axis == 0 ? d.l : axis == 1 ? d.w : d.h;
}

}  // namespace

std::vector<Placement> cut_container(const GeneratorConfig& cfg) {
  cfg.validate();
  RandomEngine rng(cfg.seed);
  std::vector<Piece> work{{0, 0, 0, cfg.container}};
  std::vector<Piece> done;
  // FIFO so siblings from one cut are refined in creation order.
  for (std::size_t head = 0; head < work.size(); ++head) {
    Piece p = work[head];
    int axis = -1;
    int best = cfg.dim_max;
    for (int a = 0; a < 3; ++a) {
      if (dim_of(p.d, a) > best) {
        best = dim_of(p.d, a);
        axis = a;
      }
    }
    if (axis < 0) {
      done.push_back(p);
      continue;
    }
    const int size = dim_of(p.d, axis);
    int off;
    if (size >= 2 * cfg.dim_min) {
      off = static_cast<int>(rng.uniform_int(cfg.dim_min, size - cfg.dim_min));
    } else {
      off = size / 2;
    }
    Piece lo = p, hi = p;
    switch (axis) {
      case 0:
        lo.d.l = off;
        hi.d.l = size - off;
        hi.x += off;
        break;
      case 1:
        lo.d.w = off;
        hi.d.w = size - off;
        hi.y += off;
        break;
      default:
        lo.d.h = off;
        hi.d.h = size - off;
        hi.z += off;
        break;
    }
    work.push_back(lo);
    work.push_back(hi);
  }
  std::vector<Placement> tiling;
  tiling.reserve(done.size());
  for (std::size_t i = 0; i < done.size(); ++i) {
    const Piece& p = done[i];
    tiling.push_back(Placement{static_cast<int>(i), p.x, p.y, p.z, 0, p.d});
  }
  return tiling;
}

namespace {

bool ranges_overlap(int a0, int a1, int b0, int b1) {
  return a0 < b1 && b0 < a1;
}

ItemSequence sequence_from_order(const std::vector<Placement>& tiling,
                                 const std::vector<int>& order,
                                 const GeneratorConfig& cfg,
                                 GeneratorKind kind) {
  ItemSequence seq;
  seq.seed = cfg.seed;
  seq.kind = kind;
  seq.items.reserve(order.size());
  seq.tiling.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    Placement p = tiling[static_cast<std::size_t>(order[i])];
    p.item_id = static_cast<int>(i);
    seq.items.push_back(p.dims);
    seq.tiling.push_back(p);
  }
  return seq;
}

}  // namespace

std::vector<std::vector<int>> support_edges(const std::vector<Placement>& tiling) {
  const int n = static_cast<int>(tiling.size());
  std::vector<std::vector<int>> deps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Placement& a = tiling[static_cast<std::size_t>(i)];
    if (a.z == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Placement& b = tiling[static_cast<std::size_t>(j)];
      if (b.z + b.dims.h != a.z) continue;
      if (ranges_overlap(a.x, a.x + a.dims.l, b.x, b.x + b.dims.l) &&
          ranges_overlap(a.y, a.y + a.dims.w, b.y, b.y + b.dims.w)) {
        deps[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  return deps;
}

std::vector<int> topological_shuffle(const std::vector<std::vector<int>>& deps,
                                     std::uint64_t seed) {
  const int n = static_cast<int>(deps.size());
  std::vector<int> pending(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> dependents(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pending[static_cast<std::size_t>(i)] =
        static_cast<int>(deps[static_cast<std::size_t>(i)].size());
    for (int j : deps[static_cast<std::size_t>(i)]) {
      dependents[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  RandomEngine rng(seed);
  std::vector<int> ready;
  for (int i = 0; i < n; ++i) {
    if (pending[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  while (!ready.empty()) {
    const std::size_t pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(ready.size()) - 1));
    const int v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    order.push_back(v);
    for (int u : dependents[static_cast<std::size_t>(v)]) {
      if (--pending[static_cast<std::size_t>(u)] == 0) ready.push_back(u);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw CyclicDependency("support graph has a cycle");
  }
  return order;
}

ItemSequence order_cut1(const std::vector<Placement>& tiling,
                        const GeneratorConfig& cfg) {
  std::vector<int> order(tiling.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Placement& pa = tiling[static_cast<std::size_t>(a)];
    const Placement& pb = tiling[static_cast<std::size_t>(b)];
    if (pa.z != pb.z) return pa.z < pb.z;
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
    return a < b;
  });
  return sequence_from_order(tiling, order, cfg, GeneratorKind::CUT1);
}

ItemSequence order_cut2(const std::vector<Placement>& tiling,
                        const GeneratorConfig& cfg, std::uint64_t order_seed) {
  const std::vector<int> order = topological_shuffle(support_edges(tiling), order_seed);
  return sequence_from_order(tiling, order, cfg, GeneratorKind::CUT2);
}

ItemSequence generate_sequence(const GeneratorConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case GeneratorKind::RS:
      return gen_rs(cfg);
    case GeneratorKind::CUT1:
      return order_cut1(cut_container(cfg), cfg);
    case GeneratorKind::CUT2: {
      // Separate stream for the emission order so the tiling itself only
      // depends on cfg.seed.
      return order_cut2(cut_container(cfg), cfg, RandomEngine::mix(cfg.seed, 1));
    }
  }
  throw BadConfig("unknown generator kind");
}

namespace {

json config_to_json(const GeneratorConfig& cfg) {
  return json{{"container", {cfg.container.l, cfg.container.w, cfg.container.h}},
              {"dim_min", cfg.dim_min},
              {"dim_max", cfg.dim_max},
              {"seed", cfg.seed},
              {"kind", to_string(cfg.kind)},
              {"stream_length", cfg.stream_length}};
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig cfg;
  cfg.container = Dims3{j.at("container").at(0).get<int>(),
                        j.at("container").at(1).get<int>(),
                        j.at("container").at(2).get<int>()};
  cfg.dim_min = j.at("dim_min").get<int>();
  cfg.dim_max = j.at("dim_max").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  cfg.stream_length = j.at("stream_length").get<int>();
  return cfg;
}

}  // namespace

void save_sequences(const std::vector<ItemSequence>& seqs,
                    const GeneratorConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  json header{{"format", "binpack-dataset"}, {"version", 1},
              {"config", config_to_json(cfg)}};
  out << header.dump() << '\n';
  for (const ItemSequence& seq : seqs) {
    json rec{{"seed", seq.seed}, {"kind", to_string(seq.kind)}};
    json items = json::array();
    for (const Dims3& d : seq.items) items.push_back({d.l, d.w, d.h});
    rec["items"] = std::move(items);
    if (!seq.tiling.empty()) {
      json tiling = json::array();
      for (const Placement& p : seq.tiling) {
        tiling.push_back({p.x, p.y, p.z, p.dims.l, p.dims.w, p.dims.h});
      }
      rec["tiling"] = std::move(tiling);
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path);
}

DatasetFile load_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("empty dataset file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "binpack-dataset") {
    throw FormatVersionMismatch("not a dataset file: " + path);
  }
  if (header.value("version", -1) != 1) {
    throw FormatVersionMismatch("unsupported dataset version in " + path);
  }
  DatasetFile file;
  file.config = config_from_json(header.at("config"));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    ItemSequence seq;
    seq.seed = rec.at("seed").get<std::uint64_t>();
    seq.kind = generator_kind_from_string(rec.at("kind").get<std::string>());
    for (const json& it : rec.at("items")) {
      seq.items.push_back(Dims3{it.at(0).get<int>(), it.at(1).get<int>(),
                                it.at(2).get<int>()});
    }
    if (rec.contains("tiling")) {
      int id = 0;
      for (const json& t : rec.at("tiling")) {
        seq.tiling.push_back(Placement{
            id++, t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>(), 0,
            Dims3{t.at(3).get<int>(), t.at(4).get<int>(), t.at(5).get<int>()}});
      }
    }
    file.sequences.push_back(std::move(seq));
  }
  return file;
}

}  // namespace binpack
