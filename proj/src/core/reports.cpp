#include "reports.hpp"

#include "csv.hpp"

namespace migtf::reports {

void write_degree_stats_csv(std::ostream& out, const graph::TripleStore& store) {
    auto stats = graph::degree_stats(store);
    out << "entity,entity_name,links\n";
    for (const auto& [entity, links] : stats)
        out << entity << ',' << csv::quote(store.vocab.entity_names[static_cast<std::size_t>(entity)])
            << ',' << links << '\n';
}

void write_relation_correlation_csv(std::ostream& out, const graph::TripleStore& store) {
    Matrix corr = graph::relation_correlation(store);
    out << "relation";
    for (const auto& name : store.vocab.relation_names) out << ',' << csv::quote(name);
    out << '\n';
    for (Index i = 0; i < corr.rows(); ++i) {
        out << csv::quote(store.vocab.relation_names[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < corr.cols(); ++j) out << ',' << corr(i, j);
        out << '\n';
    }
}

void write_metrics_csv(std::ostream& out, const eval::MetricsReport& report, eval::RankMode mode) {
    out << "metric,value\n";
    out << "rank_mode," << (mode == eval::RankMode::optimistic ? "optimistic" : "pessimistic")
        << '\n';
    out << "evaluated," << report.evaluated << '\n';
    out << "mrr," << report.mrr << '\n';
    for (const auto& [k, rate] : report.hr) out << "hr@" << k << ',' << rate << '\n';
}

void write_per_relation_csv(std::ostream& out, const std::vector<eval::PerRelationRow>& rows,
                            const graph::Vocabulary& vocab) {
    out << "relation,relation_name,test_queries,kg_links,hr@10\n";
    for (const auto& r : rows)
        out << r.relation << ','
            << csv::quote(vocab.relation_names[static_cast<std::size_t>(r.relation)]) << ','
            << r.count << ',' << r.kg_links << ',' << r.hr10 << '\n';
}

void write_degree_groups_csv(std::ostream& out, const std::vector<eval::DegreeGroupRow>& rows) {
    out << "group,triples,hr@10\n";
    for (const auto& r : rows) out << r.group << ',' << r.count << ',' << r.hr10 << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<eval::SweepRow>& rows,
                     const std::string& value_name) {
    out << value_name << ",mrr,hr@10\n";
    for (const auto& r : rows) out << r.value << ',' << r.mrr << ',' << r.hr10 << '\n';
}

}  // namespace migtf::reports
