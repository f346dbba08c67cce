#include "avfd/model.hpp"

#include "avfd/rng.hpp"

namespace avfd {

ModelState ModelState::init(const ModelHyper& hyper,
                            const PromptHierarchy& prompt_texts) {
  ModelState state;
  state.hyper = hyper;
  state.prompts = prompt_texts;
  state.prompts.init_learnable(hyper.tokens_per_prompt, hyper.d_tok,
                               mix_seed(hyper.seed, fnv1a("tokens")));
  // Identity plus small noise preserves the backbone geometry at start.
  state.W = Matrix::Identity(hyper.d, hyper.d) +
            gaussian_matrix(mix_seed(hyper.seed, fnv1a("W")), hyper.d,
                            hyper.d, 0.01);
  state.proj = Projections::seeded(hyper.seed, hyper.d, hyper.d_raw);
  state.gen = WeightGenerator::seeded(mix_seed(hyper.seed, fnv1a("mlp")),
                                      4 * hyper.d, hyper.hidden);
  return state;
}

}  // namespace avfd
