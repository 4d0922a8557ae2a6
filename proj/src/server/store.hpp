#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

struct sqlite3;

namespace elicit::server {

// Key/document table in one SQLite file. Writes are grouped into a single
// transaction.
class ProjectStore {
 public:
  explicit ProjectStore(const std::string& path);
  ~ProjectStore();
  ProjectStore(const ProjectStore&) = delete;
  ProjectStore& operator=(const ProjectStore&) = delete;

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::vector<std::pair<std::string, std::string>>& docs);

 private:
  void exec(const char* sql);

  sqlite3* db_ = nullptr;
  std::string path_;
};

}  // namespace elicit::server
