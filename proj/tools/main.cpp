#include <iostream>

#include <CLI11.hpp>

#include "aspex/common.hpp"
#include "commands.hpp"

using namespace aspex::cli;

int main(int argc, char** argv) {
  CLI::App app{"aspex: aspect term extraction with (Bi)LSTM / CRF sequence taggers"};
  app.set_version_flag("--version", std::string(aspex::kToolkitVersion));
  app.require_subcommand(1);

  PrepareOptions prep;
  auto* p = app.add_subcommand("prepare", "SemEval XML -> CoNLL IOB file plus alignment report");
  p->add_option("--xml", prep.xml, "SemEval 2014 aspect XML")->required()->check(CLI::ExistingFile);
  p->add_option("--out", prep.out, "CoNLL output")->required();
  p->add_option("--report", prep.report, "report JSON (default <out>.report.json)");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "train N runs of one variant and aggregate test F1");
  t->add_option("--config", tr.config, "flat JSON experiment config")->required()->check(CLI::ExistingFile);
  t->add_option("--embeddings", tr.embeddings, "text word vectors")->required();
  t->add_option("--train", tr.train, "training data (CoNLL or .xml)")->required()->check(CLI::ExistingFile);
  t->add_option("--test", tr.test, "test data (CoNLL or .xml)")->required()->check(CLI::ExistingFile);
  t->add_option("--out", tr.out_dir, "output directory")->required();
  t->add_option("--runs", tr.runs, "override the config's run count");
  t->add_option("--seed", tr.seed, "override the config's seed");
  t->add_flag("--quiet", tr.quiet, "no per-epoch progress");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "exact-match F1 of a checkpoint or a prediction file");
  auto* ck = e->add_option("--checkpoint", ev.checkpoint, "checkpoint from train");
  auto* pr = e->add_option("--pred", ev.pred, "predicted CoNLL file");
  ck->excludes(pr);
  e->add_option("--test", ev.test, "gold data (CoNLL or .xml)")->required()->check(CLI::ExistingFile);
  e->add_option("--embeddings", ev.embeddings, "word vectors (default: the path stored in the checkpoint)");
  e->add_option("--out", ev.out, "report JSON (default stdout)");

  CompareOptions cmp;
  auto* c = app.add_subcommand("compare", "Friedman ranks and Nemenyi critical distance over a result grid");
  c->add_option("--grid", cmp.grid, "CSV, header = treatments, one row per block")->required();
  c->add_flag("--transpose", cmp.transpose, "treat rows as treatments instead");
  c->add_option("--out", cmp.out, "stats JSON (default stdout)");
  c->add_option("--plot", cmp.plot, "plot-data TSV (treatment, mean rank)");

  CoverageOptions cov;
  auto* v = app.add_subcommand("coverage", "share of dataset vocabulary present in a vector file");
  v->add_option("--vocab-from", cov.vocab_from, "dataset file(s)")->required()->check(CLI::ExistingFile);
  v->add_option("--embeddings", cov.embeddings, "text word vectors")->required();
  v->add_option("--name", cov.name, "embedding name (default: file stem)");
  v->add_option("--dim", cov.dim, "vector dimension")->capture_default_str();
  v->add_option("--out", cov.out, "report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*p) return cmd_prepare(prep);
    if (*t) return cmd_train(tr);
    if (*e) {
      if (ev.checkpoint.empty() && ev.pred.empty()) {
        std::cerr << "eval: one of --checkpoint or --pred is required\n";
        return kExitInvalid;
      }
      return cmd_eval(ev);
    }
    if (*c) return cmd_compare(cmp);
    if (*v) return cmd_coverage(cov);
  } catch (const aspex::ValidationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInvalid;
  } catch (const aspex::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitInvalid;
  } catch (const aspex::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}
