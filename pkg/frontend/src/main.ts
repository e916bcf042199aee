import { ApiClient } from "./api.js";
import { mount } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";

const root = document.getElementById("app");
if (root) {
  mount(root, new ApiClient(baseUrl));
}
