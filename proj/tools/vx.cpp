// Copyright 2026-present the vx project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: synthetic data generation, index builds, search,
// evaluation, benchmarking, format conversion and batch loss evaluation.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
// invariant violation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/flat.hpp"
#include "vx/graph.hpp"
#include "vx/io.hpp"
#include "vx/late_interaction.hpp"
#include "vx/learning.hpp"
#include "vx/lsh.hpp"
#include "vx/metrics.hpp"
#include "vx/mips.hpp"
#include "vx/pipeline.hpp"
#include "vx/quant.hpp"
#include "vx/sparse.hpp"
#include "vx/synthetic.hpp"

namespace {

using nlohmann::json;

vx::Metric parse_metric(const std::string& name) {
    if (name == "l2" || name == "euclidean") return vx::Metric::euclidean;
    if (name == "ip" || name == "inner_product") return vx::Metric::inner_product;
    throw vx::ConfigError("unknown metric '" + name + "' (expected l2 or ip)");
}

json hits_to_json(vx::doc_id_t query_id, const std::vector<vx::ScoredHit>& hits) {
    json arr = json::array();
    for (const auto& h : hits)
        arr.push_back(json{{"id", h.doc_id}, {"score", h.score}, {"rank", h.rank}});
    return json{{"q", query_id}, {"hits", std::move(arr)}};
}

std::vector<std::pair<vx::doc_id_t, std::vector<vx::doc_id_t>>> load_hits_jsonl(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vx::DataError("cannot open for reading: " + path);
    std::vector<std::pair<vx::doc_id_t, std::vector<vx::doc_id_t>>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw vx::DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        std::vector<vx::doc_id_t> ids;
        for (const auto& h : obj.at("hits")) ids.push_back(h.at("id").get<vx::doc_id_t>());
        out.push_back({obj.at("q").get<vx::doc_id_t>(), std::move(ids)});
    }
    if (out.empty()) throw vx::DataError(path + ": no result rows");
    return out;
}

std::vector<std::vector<double>> load_score_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vx::DataError("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw vx::DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        rows.push_back(obj.at("scores").get<std::vector<double>>());
    }
    if (rows.empty()) throw vx::DataError(path + ": no score rows");
    return rows;
}

void write_or_print(const json& value, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << value.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw vx::DataError("cannot open for writing: " + out_path);
    out << value.dump(2) << '\n';
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
    std::string kind = "dense";
    std::string out;
    std::string truth;
    std::uint64_t seed = 0;
    vx::SyntheticSpec spec;
    std::size_t tokens_lo = 4, tokens_hi = 24;
    std::size_t vocab = 1000;
    std::size_t terms_lo = 3, terms_hi = 30;
};

void run_gen(const GenArgs& a) {
    vx::SyntheticSpec spec = a.spec;
    spec.seed = a.seed;
    if (a.kind == "dense") {
        const auto data = vx::gen_synthetic(spec);
        vx::save_embeddings(data.docs, a.out);
        if (!a.truth.empty()) vx::save_truth_json(data, a.truth);
    } else if (a.kind == "multi") {
        const auto docs = vx::gen_synthetic_multi(spec, a.tokens_lo, a.tokens_hi, a.vocab);
        vx::save_multi(docs, a.out);
    } else if (a.kind == "sparse") {
        const auto docs =
            vx::gen_synthetic_sparse(spec.n, a.vocab, a.terms_lo, a.terms_hi, a.seed);
        vx::save_sparse_jsonl(docs, a.out);
    } else {
        throw vx::ConfigError("gen: unknown kind '" + a.kind + "'");
    }
    std::cout << json{{"written", a.out}, {"kind", a.kind}, {"n", spec.n}}.dump() << "\n";
}

// --- build ----------------------------------------------------------------

struct BuildArgs {
    std::string docs;
    std::string kind = "flat";
    std::string metric = "l2";
    std::string out;
    std::uint64_t seed = 0;
    vx::IndexParams params;
};

void run_build(const BuildArgs& a) {
    if (a.kind == "impact") {
        const auto docs = vx::load_sparse_jsonl(a.docs);
        vx::ImpactIndex index(docs);
        vx::BinaryWriter w;
        w.magic(vx::kMagicSparse);
        index.save_payload(w);
        w.to_file(a.out);
        std::cout << json{{"written", a.out},
                          {"kind", "impact"},
                          {"docs", index.doc_count()},
                          {"terms", index.term_count()},
                          {"postings", index.posting_count()},
                          {"bytes", w.buffer().size()}}
                         .dump()
                  << "\n";
        return;
    }
    vx::IndexParams params = a.params;
    params.kind = vx::index_kind_from(a.kind);
    params.metric = parse_metric(a.metric);
    params.seed = a.seed;
    params.lsh.seed = a.seed;
    params.hnsw.seed = a.seed;
    const auto docs = vx::load_embeddings(a.docs);
    const auto index = vx::AnyIndex::build(params, docs);
    index.save(a.out);
    std::cout << json{{"written", a.out},
                      {"kind", a.kind},
                      {"n", index.size()},
                      {"bytes", index.byte_size()}}
                     .dump()
              << "\n";
}

// --- search ---------------------------------------------------------------

struct SearchArgs {
    std::string index;
    std::string queries;
    std::string out;
    std::size_t k = 10;
    std::size_t probes = 1;
    // sparse query forms
    std::string query_terms;    // comma-separated term ids, sum-of-impacts
    std::string query_weights;  // sparse JSONL, one query per line (unicoil)
    // multi-embedding two-stage
    std::string multi_docs;
    std::string multi_queries;
    std::string scorer = "summaxsim";
    std::size_t k_prime = 1000;
    std::string ann = "flat";
    std::size_t m = 0;  // 0 = all rows for poly/maxsim
    std::string proj_cls;
    std::string proj_tok;
    bool no_query_cls = false;
};

void search_dense(const SearchArgs& a, std::vector<json>& lines) {
    const auto index = vx::AnyIndex::load(a.index);
    const auto queries = vx::load_embeddings(a.queries);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto hits = a.probes > 1 || index.probe_limit() > 1
                              ? index.search(queries.vec(q), a.k,
                                             std::min(a.probes, index.probe_limit()))
                              : index.search(queries.vec(q), a.k);
        lines.push_back(hits_to_json(queries.id(q), hits));
    }
}

void search_sparse(const SearchArgs& a, std::vector<json>& lines) {
    auto r = vx::BinaryReader::from_file(a.index);
    r.expect_magic(vx::kMagicSparse);
    const auto index = vx::ImpactIndex::load_payload(r);
    if (!a.query_terms.empty()) {
        std::vector<vx::term_id_t> terms;
        std::stringstream ss(a.query_terms);
        std::string token;
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            try {
                terms.push_back(static_cast<vx::term_id_t>(std::stoul(token)));
            } catch (const std::exception&) {
                throw vx::ConfigError("search: bad term id '" + token + "'");
            }
        }
        lines.push_back(hits_to_json(0, index.score_sum_impacts(terms, a.k)));
        return;
    }
    const auto queries = vx::load_sparse_jsonl(a.query_weights);
    for (const auto& q : queries)
        lines.push_back(hits_to_json(q.id, index.score_unicoil(q.vec, a.k)));
}

void search_multi(const SearchArgs& a, std::vector<json>& lines) {
    const vx::MultiDocStore store(vx::load_multi(a.multi_docs));
    const auto queries = vx::load_multi(a.multi_queries);
    const bool include_cls = !a.no_query_cls;

    const auto tokens = store.token_matrix();
    std::optional<vx::FlatIndex> flat;
    std::optional<vx::HnswIndex> hnsw;
    std::optional<vx::MipTransform> query_map;
    if (a.ann == "flat") {
        flat.emplace(tokens, vx::Metric::inner_product);
    } else if (a.ann == "hnsw") {
        // HNSW is Euclidean; route token-level MIP through the augmentation.
        query_map = vx::MipTransform::fit(tokens);
        hnsw.emplace(query_map->transform_docs(tokens), vx::HnswParams{});
    } else {
        throw vx::ConfigError("search: unknown ann '" + a.ann + "' (expected flat or hnsw)");
    }

    std::optional<vx::CoilProjections> proj;
    if (a.scorer == "coil") {
        if (a.proj_cls.empty() || a.proj_tok.empty())
            throw vx::ConfigError("search: coil scorer needs --proj-cls and --proj-tok");
        proj = vx::CoilProjections::load(a.proj_cls, a.proj_tok);
    }

    auto stage1 = [&](const vx::MultiEmbedding& query) {
        std::vector<char> seen(store.doc_count(), 0);
        std::vector<std::size_t> candidates;
        const std::size_t first = include_cls ? 0 : 1;
        for (std::size_t i = first; i < query.rows(); ++i) {
            std::vector<vx::ScoredHit> hits;
            if (flat) {
                hits = flat->search(query.row(i).values(), a.k_prime);
            } else {
                hits = hnsw->search(query_map->transform_query(query.row(i).values()).values(),
                                    a.k_prime);
            }
            for (const auto& h : hits) {
                const std::size_t doc = store.doc_of_row(static_cast<std::size_t>(h.doc_id));
                if (!seen[doc]) {
                    seen[doc] = 1;
                    candidates.push_back(doc);
                }
            }
        }
        return candidates;
    };

    for (const auto& query : queries) {
        std::vector<vx::ScoredHit> hits;
        if (a.scorer == "summaxsim" && flat) {
            hits = vx::two_stage_search(store, *flat, query, a.k_prime, a.k, include_cls);
        } else {
            const auto candidates = stage1(query);
            vx::TopK top(a.k);
            for (std::size_t doc : candidates) {
                const auto& d = store.doc(doc);
                double score = 0.0;
                if (a.scorer == "summaxsim") {
                    score = vx::sum_maxsim_score(query, d, include_cls);
                } else if (a.scorer == "poly") {
                    score = vx::poly_score(query.row(0), d, a.m == 0 ? d.rows() : a.m);
                } else if (a.scorer == "maxsim") {
                    score = vx::maxsim_score(query.row(0), d, a.m == 0 ? d.rows() : a.m);
                } else if (a.scorer == "coil") {
                    score = vx::coil_score(query, d, *proj);
                } else {
                    throw vx::ConfigError("search: unknown scorer '" + a.scorer + "'");
                }
                top.push(d.id(), score);
            }
            hits = top.take();
        }
        lines.push_back(hits_to_json(query.id(), hits));
    }
}

void run_search(const SearchArgs& a) {
    std::vector<json> lines;
    if (!a.multi_docs.empty()) {
        search_multi(a, lines);
    } else if (!a.query_terms.empty() || !a.query_weights.empty()) {
        search_sparse(a, lines);
    } else {
        search_dense(a, lines);
    }
    if (a.out.empty()) {
        for (const auto& l : lines) std::cout << l.dump() << "\n";
    } else {
        std::ofstream out(a.out, std::ios::trunc);
        if (!out) throw vx::DataError("cannot open for writing: " + a.out);
        for (const auto& l : lines) out << l.dump() << '\n';
    }
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string results;
    std::string oracle;
    std::vector<std::size_t> ks = {1, 10};
    std::string out;
};

void run_eval(const EvalArgs& a) {
    const auto results = load_hits_jsonl(a.results);
    const auto oracle = load_hits_jsonl(a.oracle);
    if (results.size() != oracle.size())
        throw vx::DataError("eval: result count " + std::to_string(results.size()) +
                            " != oracle count " + std::to_string(oracle.size()));
    auto as_hits = [](const std::vector<vx::doc_id_t>& ids) {
        std::vector<vx::ScoredHit> hits;
        hits.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            hits.push_back({ids[i], -static_cast<double>(i), i + 1});
        return hits;
    };
    json recall = json::object();
    for (std::size_t k : a.ks) {
        double total = 0.0;
        for (std::size_t q = 0; q < results.size(); ++q) {
            if (results[q].first != oracle[q].first)
                throw vx::DataError("eval: query id mismatch at row " + std::to_string(q));
            total += vx::recall_at_k(as_hits(results[q].second), as_hits(oracle[q].second), k);
        }
        recall[std::to_string(k)] = total / static_cast<double>(results.size());
    }
    write_or_print(json{{"recall_at_k", recall}, {"queries", results.size()}}, a.out);
}

// --- convert --------------------------------------------------------------

struct ConvertArgs {
    std::string from;
    std::string to;
    std::string in;
    std::string out;
};

void run_convert(const ConvertArgs& a) {
    if (a.from == "dense" && a.to == "densejsonl") {
        const auto docs = vx::load_embeddings(a.in);
        std::ofstream out(a.out, std::ios::trunc);
        if (!out) throw vx::DataError("cannot open for writing: " + a.out);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto v = docs.vec(i);
            out << json{{"id", docs.id(i)}, {"v", std::vector<double>(v.begin(), v.end())}}.dump()
                << '\n';
        }
    } else if (a.from == "densejsonl" && a.to == "dense") {
        std::ifstream in(a.in);
        if (!in) throw vx::DataError("cannot open for reading: " + a.in);
        std::vector<vx::doc_id_t> ids;
        std::vector<double> data;
        std::size_t dim = 0;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::exception& e) {
                throw vx::DataError(a.in + ":" + std::to_string(lineno) + ": " + e.what());
            }
            const auto v = obj.at("v").get<std::vector<double>>();
            if (ids.empty()) dim = v.size();
            if (v.size() != dim)
                throw vx::DataError(a.in + ":" + std::to_string(lineno) + ": mixed dimensions");
            ids.push_back(obj.at("id").get<vx::doc_id_t>());
            data.insert(data.end(), v.begin(), v.end());
        }
        vx::save_embeddings(vx::EmbeddingSet(std::move(ids), std::move(data), dim), a.out);
    } else if (a.from == "multi" && a.to == "dense") {
        // Flatten token rows; ids become global row indices.
        const vx::MultiDocStore store(vx::load_multi(a.in));
        vx::save_embeddings(store.token_matrix(), a.out);
    } else {
        throw vx::ConfigError("convert: unsupported conversion '" + a.from + "' -> '" + a.to +
                              "'");
    }
    std::cout << json{{"written", a.out}}.dump() << "\n";
}

// --- bench ----------------------------------------------------------------

struct BenchArgs {
    std::string kind = "flat";
    std::string metric = "l2";
    vx::RunConfig cfg;
    std::uint64_t seed = 0;
};

void run_bench(const BenchArgs& a) {
    vx::RunConfig cfg = a.cfg;
    cfg.index.kind = vx::index_kind_from(a.kind);
    cfg.index.metric = parse_metric(a.metric);
    cfg.seed = a.seed;
    const auto report = vx::run_pipeline(cfg);
    std::cout << report.to_json().dump(2) << "\n";
}

// --- losses ---------------------------------------------------------------

void run_losses_nce(const std::string& scores_path, const std::string& out) {
    const auto rows = load_score_rows(scores_path);
    write_or_print(json{{"nce_loss", vx::nce_loss(rows)}, {"rows", rows.size()}}, out);
}

void run_losses_ce(const std::string& scores_path, const std::string& out) {
    const auto rows = load_score_rows(scores_path);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2)
            throw vx::DataError("ce: row " + std::to_string(i) +
                                " must hold exactly [s_pos, s_neg]");
        pairs.push_back({rows[i][0], rows[i][1]});
    }
    write_or_print(json{{"ce_triple_loss", vx::ce_triple_loss(pairs)}, {"triples", pairs.size()}},
                   out);
}

void run_losses_flops(const std::string& docs_path, std::size_t vocab, std::size_t batch_size,
                      const std::string& out) {
    const auto docs = vx::load_sparse_jsonl(docs_path);
    std::vector<vx::SparseVector> all;
    all.reserve(docs.size());
    for (const auto& d : docs) all.push_back(d.vec);
    json batches = json::array();
    const std::size_t step = batch_size == 0 ? all.size() : batch_size;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < all.size(); start += step) {
        const std::size_t end = std::min(start + step, all.size());
        std::vector<vx::SparseVector> batch(all.begin() + static_cast<std::ptrdiff_t>(start),
                                            all.begin() + static_cast<std::ptrdiff_t>(end));
        const double f = vx::flops_metric(batch, vocab);
        batches.push_back(f);
        total += f;
        ++count;
    }
    write_or_print(json{{"flops_per_batch", batches},
                        {"mean_flops", total / static_cast<double>(count)},
                        {"batch_size", step}},
                   out);
}

void run_losses_posterior(const std::string& scores_path, const std::string& out) {
    // Full partition-function softmax over every provided score; O(|D|) per
    // row, diagnostic use only.
    const auto rows = load_score_rows(scores_path);
    json posteriors = json::array();
    for (const auto& row : rows) posteriors.push_back(vx::full_posterior(row));
    write_or_print(json{{"posteriors", posteriors}}, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vector-search and learned-sparse retrieval toolbox"};
    app.require_subcommand(1);
    // Options for a subcommand live in a matching section, e.g. [bench];
    // command-line flags override config values.
    app.set_config("--config", "", "TOML config file");

    GenArgs gen;
    auto* cmd_gen = app.add_subcommand("gen", "generate synthetic corpora");
    cmd_gen->add_option("--kind", gen.kind, "dense | multi | sparse");
    cmd_gen->add_option("--out", gen.out, "output path")->required();
    cmd_gen->add_option("--truth", gen.truth, "ground-truth sidecar path (dense)");
    cmd_gen->add_option("--seed", gen.seed, "generator seed")->required();
    cmd_gen->add_option("--n", gen.spec.n, "record count");
    cmd_gen->add_option("--dim", gen.spec.dim, "dimension");
    cmd_gen->add_option("--clusters", gen.spec.clusters, "cluster count");
    cmd_gen->add_option("--cluster-std", gen.spec.cluster_std, "within-cluster std");
    cmd_gen->add_option("--mean-scale", gen.spec.mean_scale, "cluster mean scale");
    cmd_gen->add_option("--tokens-lo", gen.tokens_lo, "min tokens per doc (multi)");
    cmd_gen->add_option("--tokens-hi", gen.tokens_hi, "max tokens per doc (multi)");
    cmd_gen->add_option("--vocab", gen.vocab, "vocabulary size (multi/sparse)");
    cmd_gen->add_option("--terms-lo", gen.terms_lo, "min terms per doc (sparse)");
    cmd_gen->add_option("--terms-hi", gen.terms_hi, "max terms per doc (sparse)");

    BuildArgs build;
    auto* cmd_build = app.add_subcommand("build", "build an index artifact");
    cmd_build->add_option("--docs", build.docs, "input corpus")->required();
    cmd_build->add_option("--kind", build.kind, "flat | lsh | ivf | pq | ivfpq | hnsw | impact");
    cmd_build->add_option("--metric", build.metric, "l2 | ip");
    cmd_build->add_option("--out", build.out, "artifact path")->required();
    cmd_build->add_option("--seed", build.seed, "build seed");
    cmd_build->add_option("--lsh-tables", build.params.lsh.tables, "LSH table count");
    cmd_build->add_option("--lsh-projections", build.params.lsh.projections,
                          "LSH projections per table");
    cmd_build->add_option("--lsh-width", build.params.lsh.width,
                          "LSH bucket width, in median-distance units");
    cmd_build->add_option("--ivf-lists", build.params.ivf_lists, "IVF/IVFPQ list count");
    cmd_build->add_option("--pq-m", build.params.pq_m, "PQ sub-vector count");
    cmd_build->add_option("--pq-k", build.params.pq_k, "PQ centroids per sub-quantiser");
    cmd_build->add_option("--kmeans-iters", build.params.kmeans_iters, "k-means iterations");
    cmd_build->add_option("--hnsw-degree", build.params.hnsw.max_degree, "HNSW max degree");
    cmd_build->add_option("--hnsw-efc", build.params.hnsw.ef_construction,
                          "HNSW construction beam");
    cmd_build->add_option("--hnsw-efs", build.params.hnsw.ef_search, "HNSW search beam");
    cmd_build->add_option("--hnsw-level-scale", build.params.hnsw.level_scale,
                          "HNSW level scale mL");

    SearchArgs search;
    auto* cmd_search = app.add_subcommand("search", "query an index artifact");
    cmd_search->add_option("--index", search.index, "index artifact");
    cmd_search->add_option("--queries", search.queries, "dense query file");
    cmd_search->add_option("--out", search.out, "hits JSONL output (stdout when omitted)");
    cmd_search->add_option("--k", search.k, "results per query");
    cmd_search->add_option("--probes", search.probes, "IVF/IVFPQ probe count");
    cmd_search->add_option("--query-terms", search.query_terms,
                           "comma-separated term ids (impact index)");
    cmd_search->add_option("--query-weights", search.query_weights,
                           "sparse JSONL query weights (impact index)");
    cmd_search->add_option("--multi", search.multi_docs, "multi-embedding corpus");
    cmd_search->add_option("--queries-multi", search.multi_queries, "multi-embedding queries");
    cmd_search->add_option("--scorer", search.scorer, "poly | maxsim | summaxsim | coil");
    cmd_search->add_option("--kprime", search.k_prime, "stage-1 depth per query row");
    cmd_search->add_option("--ann", search.ann, "stage-1 index: flat | hnsw");
    cmd_search->add_option("--m", search.m, "rows used by poly/maxsim (0 = all)");
    cmd_search->add_option("--proj-cls", search.proj_cls, "coil classification projection");
    cmd_search->add_option("--proj-tok", search.proj_tok, "coil token projection");
    cmd_search->add_flag("--no-query-cls", search.no_query_cls,
                         "drop query row 0 from late-interaction scoring");

    EvalArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "recall of results vs oracle results");
    cmd_eval->add_option("--results", eval.results, "hits JSONL")->required();
    cmd_eval->add_option("--oracle", eval.oracle, "oracle hits JSONL")->required();
    cmd_eval->add_option("--k", eval.ks, "recall depths");
    cmd_eval->add_option("--out", eval.out, "output path (stdout when omitted)");

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "build + query + grade against flat oracle");
    cmd_bench->add_option("--kind", bench.kind, "index kind");
    cmd_bench->add_option("--metric", bench.metric, "l2 | ip");
    cmd_bench->add_option("--seed", bench.seed, "run seed")->required();
    cmd_bench->add_option("--docs", bench.cfg.docs_path, "dense corpus (synthetic when omitted)");
    cmd_bench->add_option("--queries", bench.cfg.queries_path, "dense queries");
    cmd_bench->add_option("--n", bench.cfg.synth.n, "synthetic corpus size");
    cmd_bench->add_option("--dim", bench.cfg.synth.dim, "synthetic dimension");
    cmd_bench->add_option("--clusters", bench.cfg.synth.clusters, "synthetic clusters");
    cmd_bench->add_option("--query-count", bench.cfg.query_count, "queries to run");
    cmd_bench->add_option("--probes", bench.cfg.probes, "IVF/IVFPQ probe count");
    cmd_bench->add_option("--depth", bench.cfg.candidate_depth, "candidate depth per query");
    cmd_bench->add_option("--recall-ks", bench.cfg.recall_ks, "recall depths");
    cmd_bench->add_option("--oracle-cap", bench.cfg.oracle_cap, "skip oracle above this size");
    cmd_bench->add_option("--report", bench.cfg.report_path, "report JSON path");
    cmd_bench->add_option("--load-index", bench.cfg.index_path, "load artifact instead of build");
    cmd_bench->add_option("--lsh-tables", bench.cfg.index.lsh.tables, "LSH table count");
    cmd_bench->add_option("--lsh-projections", bench.cfg.index.lsh.projections,
                          "LSH projections per table");
    cmd_bench->add_option("--lsh-width", bench.cfg.index.lsh.width, "LSH width");
    cmd_bench->add_option("--ivf-lists", bench.cfg.index.ivf_lists, "IVF/IVFPQ lists");
    cmd_bench->add_option("--pq-m", bench.cfg.index.pq_m, "PQ sub-vectors");
    cmd_bench->add_option("--pq-k", bench.cfg.index.pq_k, "PQ centroids");
    cmd_bench->add_option("--kmeans-iters", bench.cfg.index.kmeans_iters, "k-means iterations");
    cmd_bench->add_option("--hnsw-degree", bench.cfg.index.hnsw.max_degree, "HNSW degree");
    cmd_bench->add_option("--hnsw-efc", bench.cfg.index.hnsw.ef_construction,
                          "HNSW construction beam");
    cmd_bench->add_option("--hnsw-efs", bench.cfg.index.hnsw.ef_search, "HNSW search beam");

    ConvertArgs convert;
    auto* cmd_convert = app.add_subcommand("convert", "transcode between corpus formats");
    cmd_convert->add_option("--from", convert.from, "dense | densejsonl | multi")->required();
    cmd_convert->add_option("--to", convert.to, "dense | densejsonl")->required();
    cmd_convert->add_option("--in", convert.in, "input path")->required();
    cmd_convert->add_option("--out", convert.out, "output path")->required();

    auto* cmd_losses = app.add_subcommand("losses", "batch loss evaluation");
    cmd_losses->require_subcommand(1);
    std::string losses_scores, losses_out, losses_docs;
    std::size_t losses_vocab = 30522, losses_batch = 0;
    auto* cmd_nce = cmd_losses->add_subcommand("nce", "mean NCE loss over score rows");
    cmd_nce->add_option("--scores", losses_scores, "score rows JSONL")->required();
    cmd_nce->add_option("--out", losses_out, "output path");
    auto* cmd_ce = cmd_losses->add_subcommand("ce", "mean triple cross entropy");
    cmd_ce->add_option("--scores", losses_scores, "[s_pos, s_neg] rows JSONL")->required();
    cmd_ce->add_option("--out", losses_out, "output path");
    auto* cmd_flops = cmd_losses->add_subcommand("flops", "FLOPS sparsity metric over batches");
    cmd_flops->add_option("--docs", losses_docs, "sparse corpus JSONL")->required();
    cmd_flops->add_option("--vocab", losses_vocab, "vocabulary size");
    cmd_flops->add_option("--batch-size", losses_batch, "batch size (0 = whole file)");
    cmd_flops->add_option("--out", losses_out, "output path");
    auto* cmd_post = cmd_losses->add_subcommand("posterior", "full softmax posterior (slow)");
    cmd_post->add_option("--scores", losses_scores, "score rows JSONL")->required();
    cmd_post->add_option("--out", losses_out, "output path");

    try {
        app.parse(argc, argv);
        if (*cmd_gen) run_gen(gen);
        if (*cmd_build) run_build(build);
        if (*cmd_search) run_search(search);
        if (*cmd_eval) run_eval(eval);
        if (*cmd_bench) run_bench(bench);
        if (*cmd_convert) run_convert(convert);
        if (*cmd_losses) {
            if (*cmd_nce) run_losses_nce(losses_scores, losses_out);
            if (*cmd_ce) run_losses_ce(losses_scores, losses_out);
            if (*cmd_flops) run_losses_flops(losses_docs, losses_vocab, losses_batch, losses_out);
            if (*cmd_post) run_losses_posterior(losses_scores, losses_out);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const vx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vx::InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 4;
    } catch (const vx::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
