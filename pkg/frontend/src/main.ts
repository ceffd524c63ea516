import { ApiClient } from "./api.js";
import { AnnotatorApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new AnnotatorApp(root, new ApiClient());

// hash routing: #report/<id> shows a report, anything else annotates
function route(): void {
  const hash = window.location.hash;
  const match = hash.match(/^#report\/(.+)$/);
  if (match && match[1]) {
    void app.reviewReport(match[1]);
  } else {
    void app.loadNextTask();
  }
}

window.addEventListener("hashchange", route);
route();
