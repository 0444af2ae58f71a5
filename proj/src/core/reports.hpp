#pragma once
// CSV writers for the analysis and evaluation outputs.

#include <ostream>

#include "evaluation.hpp"
#include "graph_data.hpp"

namespace migtf::reports {

void write_degree_stats_csv(std::ostream& out, const graph::TripleStore& store);
void write_relation_correlation_csv(std::ostream& out, const graph::TripleStore& store);
void write_metrics_csv(std::ostream& out, const eval::MetricsReport& report,
                       eval::RankMode mode);
void write_per_relation_csv(std::ostream& out, const std::vector<eval::PerRelationRow>& rows,
                            const graph::Vocabulary& vocab);
void write_degree_groups_csv(std::ostream& out, const std::vector<eval::DegreeGroupRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<eval::SweepRow>& rows,
                     const std::string& value_name);

}  // namespace migtf::reports
