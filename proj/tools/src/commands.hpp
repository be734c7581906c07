#pragma once

#include "run_context.hpp"

namespace pat::cli {

int cmd_train(RunContext& run);
int cmd_attack(RunContext& run);
int cmd_ablate(RunContext& run);
int cmd_eval(RunContext& run, bool dump_frames);
int cmd_servo(RunContext& run);
int cmd_gradcheck(RunContext& run);
int cmd_preview(RunContext& run);

}  // namespace pat::cli
