#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rui/auth.hpp"

// Prints an argon2id hash for RUI_ADMIN_PASS_HASH. The password is read from
// stdin so it never shows up in the process list.
int main(int argc, char** argv) {
  CLI::App app{"Hash an admin password"};
  std::string strength = "interactive";
  app.add_option("--strength", strength, "minimal|interactive|moderate")
      ->check(CLI::IsMember({"minimal", "interactive", "moderate"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  std::string password;
  if (!std::getline(std::cin, password) || password.empty()) {
    std::cerr << "rui-passwd: expected a password on stdin\n";
    return 1;
  }
  auto s = rui::HashStrength::Interactive;
  if (strength == "minimal") s = rui::HashStrength::Minimal;
  if (strength == "moderate") s = rui::HashStrength::Moderate;
  std::cout << rui::hash_password(password, s) << "\n";
  return 0;
}
