#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "fedplan/money.hpp"
#include "fedplan/schema.hpp"
#include "fedplan/topology.hpp"

namespace fedplan {

inline constexpr double kBytesPerGB = 1e9;

struct SizeStats {
  std::uint64_t size_bytes = 0;
  std::uint64_t row_count = 0;

  double gigabytes() const { return static_cast<double>(size_bytes) / kBytesPerGB; }

  friend bool operator==(const SizeStats&, const SizeStats&) = default;
};

/// Push-down comparison inputs. `exec_local` is the whole cost of the database-side option:
/// execution at the site of the largest input plus moving any other inputs
/// there. `move` + `exec_remote` is the central-engine option.
struct CostEstimate {
  Money move;
  Money exec_remote;
  Money exec_local;
};

/// Whole-plan cost; `total` always equals the exact sum of the parts.
struct TotalCost {
  Money compute;
  Money storage;
  Money transfer;
  Money total;

  static TotalCost of(Money compute, Money storage, Money transfer) {
    return {compute, storage, transfer, compute + storage + transfer};
  }
  friend bool operator==(const TotalCost&, const TotalCost&) = default;
};

namespace detail {

inline std::uint64_t scale_count(std::uint64_t n, double factor) {
  double v = std::round(static_cast<double>(n) * factor);
  if (!(v < 1.8e19)) throw ValidationError("size estimate overflows 64 bits");
  return static_cast<std::uint64_t>(v);
}

inline SizeStats normalized(SizeStats s) {
  if (s.size_bytes == 0 || s.row_count == 0) return {};
  return s;
}

}  // namespace detail

/// Output cardinality estimate for one transform. Sizes are rounded to whole
/// bytes and rows; an output with zero rows has zero bytes and vice versa.
inline SizeStats estimate_output_size(const Transform& t, std::span<const SizeStats> inputs,
                                      std::span<const Schema> input_schemas, const SelectivityConfig& sel) {
  sel.validate();
  if (inputs.size() != t.inputs.size()) throw ValidationError("estimate_output_size: one SizeStats per input required");
  auto factor = [&](double configured) {
    double f = t.selectivity.value_or(configured);
    if (!std::isfinite(f) || f < 0) throw ValidationError("selectivity must be finite and non-negative");
    return f;
  };
  auto scale_both = [&](const SizeStats& in, double f) {
    return detail::normalized({detail::scale_count(in.size_bytes, f), detail::scale_count(in.row_count, f)});
  };
  auto scale_bytes = [&](const SizeStats& in, double f) {
    return detail::normalized({detail::scale_count(in.size_bytes, f), in.row_count});
  };
  switch (t.kind) {
    case TransformKind::Filter: return scale_both(inputs[0], factor(sel.filter_selectivity));
    case TransformKind::Aggregate: return scale_both(inputs[0], factor(sel.aggregate_reduction));
    case TransformKind::Project: {
      const auto& p = std::get<ProjectParams>(t.params);
      if (input_schemas.size() != 1 || input_schemas[0].size() == 0)
        throw ValidationError("estimate_output_size: Project needs its input schema");
      double fraction = static_cast<double>(p.columns.size()) / static_cast<double>(input_schemas[0].size());
      return scale_bytes(inputs[0], t.selectivity.value_or(fraction));
    }
    case TransformKind::Join: {
      std::uint64_t rows = 0;
      double width = 0;  // output row width is the sum of input row widths
      for (const auto& in : inputs) {
        rows = std::max(rows, in.row_count);
        if (in.row_count) width += static_cast<double>(in.size_bytes) / static_cast<double>(in.row_count);
      }
      std::uint64_t out_rows = detail::scale_count(rows, factor(sel.join_fanout));
      return detail::normalized({detail::scale_count(out_rows, width), out_rows});
    }
    case TransformKind::Union: {
      SizeStats out;
      for (const auto& in : inputs) {
        out.size_bytes += in.size_bytes;
        out.row_count += in.row_count;
      }
      return out;
    }
    case TransformKind::Window: return scale_bytes(inputs[0], factor(sel.window_expansion));
    case TransformKind::Expression: return scale_bytes(inputs[0], factor(sel.expression_expansion));
    case TransformKind::JsonParse: return scale_bytes(inputs[0], factor(sel.jsonparse_expansion));
    case TransformKind::Recursive: return scale_both(inputs[0], factor(sel.recursive_expansion));
  }
  return {};
}

/// Declared sizes for datasets, estimated sizes for transforms.
inline std::map<std::string, SizeStats> estimate_sizes(const Pipeline& p, const SchemaMap& schemas,
                                                       const SelectivityConfig& sel) {
  std::map<std::string, SizeStats> sizes;
  for (const auto& d : p.datasets()) sizes[d.id] = {d.size_bytes, d.row_count};
  for (const auto& id : topo_order(p)) {
    const Transform& t = *p.find_transform(id);
    std::vector<SizeStats> in;
    std::vector<Schema> in_schemas;
    for (const auto& i : t.inputs) {
      in.push_back(sizes.at(i));
      in_schemas.push_back(schemas.at(i));
    }
    sizes[id] = estimate_output_size(t, in, in_schemas, sel);
  }
  return sizes;
}

/// Egress for moving `volume` from `src` to `dst`; free within a site.
inline Money cost_move(const SizeStats& volume, std::string_view src, std::string_view dst, const Topology& topo) {
  if (src == dst) return {};
  return topo.link(src, dst).egress_rate.times_bytes(volume.size_bytes);
}

/// Volume-priced execution of `t` over `input_volume` at `s`.
inline Money cost_exec(const Transform& /*t*/, const SizeStats& input_volume, const Site& s) {
  return s.compute_rate.times_bytes(input_volume.size_bytes);
}

}  // namespace fedplan
