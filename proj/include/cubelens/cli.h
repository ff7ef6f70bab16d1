// Batch command-line entry points.
//
//   cubelens ingest   --input F [--write F] [--anonymize SALT]
//   cubelens hours    --input F [--context basic|aggregative|multiagg | --spec TEXT]
//   cubelens events   --input F
//   cubelens explain  --input F --event I [--author A] [--hashtags]
//   cubelens hashtags --input F [--event I]
//   cubelens topics   --input F --n N [--hashtags K,...]
//   cubelens predict  --input F --communities F --spreader S --hashtags K,... --day D --hour H
//   cubelens serve    --data F [--port P] [--communities F] [--ui DIR]
//   cubelens synth    [--preset NAME | --scenario F] [--seed N] --out F [--manifest F]
//
// Reports go to stdout (or --out), diagnostics to stderr. Exit status is 0 on
// success, 1 on usage errors and 2 on data errors.

#ifndef CUBELENS_CLI_H_
#define CUBELENS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace cubelens {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// `args` excludes the program name: {"events", "--input", "log.csv", ...}.
int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cubelens

#endif  // CUBELENS_CLI_H_
