#include "dre/train/ablate.hpp"

#include <cstdio>

#include "dre/error.hpp"

namespace dre::train {

std::vector<AblationConfig> ablation_grid(std::size_t base_hidden,
                                        std::span<const std::size_t> hidden_sizes) {
  static constexpr std::size_t kDefaultHidden[] = {64, 128, 256};
  if (hidden_sizes.empty()) hidden_sizes = kDefaultHidden;
  if (hidden_sizes.size() != 3) throw ConfigError("ablation needs exactly three hidden sizes");

  std::vector<AblationConfig> grid;
  const char* layer_ids[] = {"1a", "1b", "1c", "1d", "1e"};
  for (std::size_t l = 1; l <= 5; ++l) {
    grid.push_back({layer_ids[l - 1], std::to_string(l) + "Layer-Lstm", l, base_hidden, true});
  }
  const char* hidden_ids[] = {"2a", "2b", "2c"};
  for (std::size_t i = 0; i < 3; ++i) {
    grid.push_back({hidden_ids[i], "3Lstm-" + std::to_string(hidden_sizes[i]) + "Hidden", 3,
                    hidden_sizes[i], true});
  }
  grid.push_back({"3", "3Lstm_no_residual", 3, base_hidden, false});
  return grid;
}

std::vector<AblationRow> ablate(const model::ModelConfig& base, const TrainConfig& config,
                                const AblationData& data, std::span<const AblationConfig> grid,
                                const std::function<void(const AblationRow&)>& on_row) {
  if (data.train == nullptr) throw ConfigError("ablation needs a training set");
  std::vector<AblationRow> rows;
  for (const auto& cfg : grid) {
    model::ModelConfig mc = base;
    mc.encoder.num_layers = cfg.layers;
    mc.encoder.hidden_size = cfg.hidden;
    mc.encoder.residual = cfg.residual;
    const auto result = train(mc, config, *data.train, data.dev, data.store);

    AblationRow row;
    row.config = cfg;
    row.parameters = model::parameter_count(result.best.config());
    row.epochs = result.log.size();
    row.best_epoch = result.best_epoch;
    row.train_f1 = evaluate(result.best, data.train->examples, data.store).metrics.macro_f1;
    row.dev_f1 = data.dev.empty() ? row.train_f1
                                  : evaluate(result.best, data.dev, data.store).metrics.macro_f1;
    if (!data.test.empty()) row.test_f1 = evaluate(result.best, data.test, data.store).metrics.macro_f1;
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_ablation_tsv(std::ostream& out, std::span<const AblationRow> rows,
                        const TrainConfig& config) {
  out << "# artifact defaults: selection=dev_macro_f1 patience=" << config.patience
      << " max_epochs=" << config.max_epochs << " seed=" << config.seed
      << " batch_size=" << config.batch_size << " learning_rate=" << config.learning_rate << '\n';
  out << "id\tconfig\tlayers\thidden\tresidual\tparameters\tepochs\tbest_epoch\ttrain_f1\tdev_f1"
         "\ttest_f1\n";
  for (const auto& r : rows) {
    out << r.config.id << '\t' << r.config.description << '\t' << r.config.layers << '\t'
        << r.config.hidden << '\t' << (r.config.residual ? "on" : "off") << '\t' << r.parameters
        << '\t' << r.epochs << '\t' << r.best_epoch << '\t' << fixed4(r.train_f1) << '\t'
        << fixed4(r.dev_f1) << '\t' << (r.test_f1 ? fixed4(*r.test_f1) : "NA") << '\n';
  }
}

}  // namespace dre::train
