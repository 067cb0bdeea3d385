#include "Commands.hpp"

#include "semantic_mesh/Errors.hpp"

#include <algorithm>
#include <iostream>
#include <string>

int main(int argc, char** argv)
{
  CLI::App app{"Semantic elevation mesh mapping: simulate, run, eval, fitdist, validate, bench"};
  app.require_subcommand(1);
  semantic_mesh::cli::registerCommands(app);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = semantic_mesh::cli::withConfigArgs(app, std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    // One line, machine-parseable: "error <kind>: <message>".
    std::cerr << "error usage: " << e.what() << '\n';
    return 2;
  } catch (const semantic_mesh::Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error " << e.kind() << ": " << msg << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
