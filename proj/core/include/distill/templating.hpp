#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distill/alert.hpp"
#include "distill/hierarchy.hpp"

namespace distill {

/// How many attributes each source generalizes. Per-source overrides win over
/// the per-kind defaults (IDS signatures 2, anomaly detectors and custom rules 1).
struct GlPolicy {
  int signature = 2;
  int anomaly = 1;
  int custom = 1;
  std::map<std::string, int> by_source;

  int gl_for(const std::string& source, SourceKind kind) const;
};

/// Source catalog keyed by source id.
using SourceCatalog = std::map<std::string, AlertSource>;

/// Derives the catalog from the alerts themselves. Every alert of a source
/// must carry the same attribute names in the same order.
SourceCatalog build_catalog(std::span<const Alert> alerts, const GlPolicy& policy = {});

/// Attribute whose most common value occurs least often; ties go to the
/// earlier attribute in `schema`.
std::string select_attribute(std::span<const GeneralizedAlert> alerts, const std::vector<std::string>& schema);

/// Replaces `attr` with its parent in the tree matching the value kind.
GeneralizedAlert generalize_attribute(GeneralizedAlert alert, std::string_view attr, const HierarchySet& trees);

/// Merges alerts with identical attribute tuples. Output is sorted by tuple.
std::vector<GeneralizedAlert> merge_identical(std::vector<GeneralizedAlert> alerts);

/// What was learned for one source.
struct SourceTemplate {
  std::string source;
  SourceKind kind = SourceKind::Signature;
  std::string signature;
  int gl = 0;
  std::vector<std::string> schema;
  std::vector<std::string> selections;  // in selection order, repeats climb further

  /// (attribute, hierarchy level reached), in first-selection order.
  std::vector<std::pair<std::string, int>> levels() const;
};

/// Learned templates plus the network ranges that shape the IP tree.
struct TemplateModel {
  std::map<std::string, SourceTemplate> sources;
  NetworkConfig network;

  HierarchySet trees() const { return HierarchySet::defaults(network); }

  std::string serialize() const;
  static TemplateModel parse(std::string_view text, std::string_view name = "templates.model");
  static TemplateModel load(const std::string& path);
  void save(const std::string& path) const;
};

struct TemplatingResult {
  std::vector<GeneralizedAlert> generalized;
  TemplateModel model;
};

/// Template extraction and merging. Per source, `gl` rounds of
/// {select_attribute; generalize it on every alert; merge_identical}.
/// Output ids are "ga-0001"... ordered by (first_seen, source, first member).
TemplatingResult run_templating(std::span<const Alert> alerts, const SourceCatalog& catalog,
                                const NetworkConfig& network, unsigned jobs = 1);

/// Re-applies a learned model: each attribute is lifted to its learned level
/// (values already at or above it are kept), then identical tuples merge.
/// Applying a model to its own output changes nothing.
std::vector<GeneralizedAlert> apply_model(std::span<const GeneralizedAlert> alerts, const TemplateModel& model,
                                          unsigned jobs = 1);
std::vector<GeneralizedAlert> apply_model(std::span<const Alert> alerts, const TemplateModel& model,
                                          unsigned jobs = 1);

/// Sorts by (first_seen, source, first member) and assigns "ga-NNNN" ids.
void assign_generalized_ids(std::vector<GeneralizedAlert>& alerts);

}  // namespace distill
