// Fit on half of a synthetic corpus held in memory, then identify the other
// half.

#include <sopool/sopool.hpp>

#include <cstdio>

int main() {
  using namespace sopool;

  SynthSpec spec;
  spec.subjects = 6;
  spec.per_subject = 8;
  spec.side = 48;
  const std::vector<GrayImage> images = generate_synthetic(spec);

  std::vector<std::size_t> gallery, probes;
  for (std::size_t i = 0; i < images.size(); ++i) (i % 8 < 4 ? gallery : probes).push_back(i);

  PipelineConfig cfg;
  cfg.target_side = 48;
  cfg.dict_size = 10;
  cfg.grids = {1, 2, 4};
  const Model model = fit_pipeline(images, gallery, cfg);
  std::printf("descriptor dimension %ld, %zu subjects\n", static_cast<long>(model.extractor.descriptor_dim()),
              model.ridge.classes.size());

  const Evaluation ev = evaluate(model, images, probes);
  std::printf("identified %zu of %zu probes\n", ev.correct, ev.total);
  for (std::size_t t = 0; t < ev.confusion.labels.size(); ++t) {
    std::printf("%s:", ev.confusion.labels[t].c_str());
    for (std::size_t n : ev.confusion.counts[t]) std::printf(" %zu", n);
    std::printf("\n");
  }
  return 0;
}
