/** All UI strings in one place. PT-BR is the default and only bundled language. */

export const STRINGS = {
  appTitle: "Ordenação de respostas",
  loading: "Carregando tarefas…",
  loadFailed: "Não foi possível carregar as tarefas.",
  retry: "Tentar novamente",
  emptyState: "Nenhuma lacuna para ordenar.",
  allDone: "Todas as ordenações foram enviadas. Obrigado!",
  instructions:
    "Ordene as palavras de modo que as mais acima façam mais sentido no contexto da frase.",
  sentenceLabel: "Frase com a lacuna:",
  submit: "Enviar ordenação",
  submitHint: "Mova ao menos um item antes de enviar.",
  submitFailed: "O envio falhou:",
  sending: "Enviando…",
  moveUp: "Mover para cima",
  moveDown: "Mover para baixo",
  progress: (done: number, total: number) => `${done} / ${total}`,
  judgePrompt: "Identificação do juiz:",
  judgeStart: "Começar",
  keyboardHint:
    "Dica: use Tab para focar uma palavra e as setas para cima/baixo para movê-la.",
};
