#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ects {

using WarningHandler = std::function<void(std::string_view)>;

// Warnings go to stderr unless a handler is installed. Returns the previous
// handler so tests can restore it.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

// Installs a handler for the lifetime of the object and collects messages.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace ects
