#pragma once

#include "config.hpp"

namespace slideflow::cli {

void cmd_synth(RunConfig rc);
void cmd_train(RunConfig rc);
void cmd_predict(RunConfig rc);
void cmd_eval(RunConfig rc);
void cmd_ablate(RunConfig rc);
void cmd_bench(RunConfig rc);

}  // namespace slideflow::cli
